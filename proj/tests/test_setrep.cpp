#include <random>

#include "doctest.h"
#include "twisted/errors.hpp"
#include "twisted/setrep.hpp"

using namespace twisted;

namespace {

BlockSet with_blocks(double t, const std::vector<std::pair<BigInt, BigInt>>& runs) {
  BlockSet set(t);
  for (const auto& [start, len] : runs) {
    set = append_block(std::move(set), Block(start, len), interval_sum(start, len, t), harmonic_mass(start, len));
  }
  return set;
}

}  // namespace

TEST_CASE("block invariants") {
  CHECK_THROWS_AS(Block(1, 3), InvalidArgument);
  CHECK_THROWS_AS(Block(2, 0), InvalidArgument);
  const Block b(2, 3);
  CHECK(b.end() == 5);
  CHECK(b.str() == "[2, 5)");
}

TEST_CASE("append_block") {
  BlockSet set(1.0);
  set = append_block(std::move(set), Block(2, 3), interval_sum(2, 3, 1.0), harmonic_mass(2, 3));
  REQUIRE(set.blocks().size() == 1);
  CHECK(std::abs(set.total_mass().value.real() - 13.0 / 12.0) <= set.total_mass().err + 1e-16);
  CHECK(set.next_free() == 5);

  // touching blocks are disjoint
  const BlockSet touching = append_block(set, Block(5, 2), interval_sum(5, 2, 1.0), harmonic_mass(5, 2));
  CHECK(touching.blocks().size() == 2);
  CHECK(touching.element_count() == 5);

  try {
    append_block(set, Block(4, 2), interval_sum(4, 2, 1.0), harmonic_mass(4, 2));
    FAIL("overlap accepted");
  } catch (const OverlapError& e) {
    const std::string what = e.what();
    CHECK(what.find("[4, 6)") != std::string::npos);
    CHECK(what.find("[2, 5)") != std::string::npos);
  }
  // the original is untouched by a rejected append
  CHECK(set.blocks().size() == 1);
}

TEST_CASE("persistence") {
  const BlockSet set = with_blocks(0.7, {{2, 3}, {9, 40}, {1000, 17}});
  const std::string doc = save(set);
  const BlockSet back = load(doc);
  CHECK(back == set);
  CHECK(save(back) == doc);

  SUBCASE("huge starts survive exactly") {
    BigInt big = 1;
    for (int i = 0; i < 40; ++i) big *= 10;
    const BlockSet huge = with_blocks(1.0, {{big, big / 1000}});
    const BlockSet again = load(save(huge));
    CHECK(to_decimal(again.blocks()[0].start()) == "1" + std::string(40, '0'));
    CHECK(again == huge);
  }

  SUBCASE("rejections") {
    CHECK_THROWS_AS(load("{not json"), FormatError);
    CHECK_THROWS_AS(load("[]"), FormatError);
    const std::string overlapping =
        R"({"t":"1","blocks":[{"start":"2","len":"3"},{"start":"4","len":"1"}],)"
        R"("total_mass":{"value":"0","err":"0"},"total_sum":{"re":"0","im":"0","err":"0"}})";
    CHECK_THROWS_AS(load(overlapping), FormatError);
    const std::string low_start =
        R"({"t":"1","blocks":[{"start":"1","len":"3"}],)"
        R"("total_mass":{"value":"0","err":"0"},"total_sum":{"re":"0","im":"0","err":"0"}})";
    CHECK_THROWS_AS(load(low_start), FormatError);
    const std::string numeric_start =
        R"({"t":"1","blocks":[{"start":2,"len":"3"}],)"
        R"("total_mass":{"value":"0","err":"0"},"total_sum":{"re":"0","im":"0","err":"0"}})";
    CHECK_THROWS_AS(load(numeric_start), FormatError);
    const std::string negative_err =
        R"({"t":"1","blocks":[],)"
        R"("total_mass":{"value":"0","err":"-1"},"total_sum":{"re":"0","im":"0","err":"0"}})";
    CHECK_THROWS_AS(load(negative_err), FormatError);
    CHECK_THROWS_AS(load(R"({"t":"1","blocks":[]})"), FormatError);
  }
}

TEST_CASE("round trip and mass bookkeeping (randomized)") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    const double t = std::uniform_real_distribution<double>(-5, 5)(rng);
    BlockSet set(t);
    BigInt next = 2 + rng() % 50;
    for (int k = 0; k < 6; ++k) {
      const BigInt len = 1 + rng() % 3000;
      const BigInt start = next + rng() % 5000;
      set = append_block(std::move(set), Block(start, len), interval_sum(start, len, t), harmonic_mass(start, len));
      next = start + len;
      next *= 1 + rng() % 4;  // occasional large jumps
    }
    CHECK(load(save(set)) == set);

    CertifiedSum mass;
    for (const auto& b : set.blocks()) mass = mass + harmonic_mass(b.start(), b.len());
    CHECK(std::abs(mass.value.real() - set.total_mass().value.real()) <= mass.err + set.total_mass().err);
  }
}
