#pragma once

// Run-length representation of a set of integers >= 2 as increasing,
// pairwise disjoint blocks of consecutive integers.

#include <string>
#include <vector>

#include "twisted/numeric.hpp"
#include "twisted/powersum.hpp"

namespace twisted {

/// The integers [start, start + len). start >= 2, len >= 1.
class Block {
 public:
  Block(BigInt start, BigInt len);

  const BigInt& start() const { return start_; }
  const BigInt& len() const { return len_; }
  /// One past the last element.
  BigInt end() const { return start_ + len_; }
  std::string str() const;

  friend bool operator==(const Block&, const Block&) = default;

 private:
  BigInt start_;
  BigInt len_;
};

/// Blocks in increasing order together with running totals of sum 1/n and
/// sum n^{-1-it} at the set's t. Adjacent blocks are never merged.
class BlockSet {
 public:
  explicit BlockSet(double t) : t_(t) {}

  double t() const { return t_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  bool empty() const { return blocks_.empty(); }
  const CertifiedSum& total_mass() const { return total_mass_; }
  const CertifiedSum& total_sum() const { return total_sum_; }
  BigInt element_count() const;
  /// Smallest integer a new block may start at.
  BigInt next_free() const;

  friend bool operator==(const BlockSet&, const BlockSet&) = default;

 private:
  friend BlockSet append_block(BlockSet set, Block b, const CertifiedSum& sum_b, const CertifiedSum& mass_b);
  friend BlockSet load(const std::string& document);

  double t_;
  std::vector<Block> blocks_;
  CertifiedSum total_mass_;
  CertifiedSum total_sum_;
};

/// Appends b after the last block. Throws OverlapError naming both blocks if
/// b.start() is not past the current last element.
BlockSet append_block(BlockSet set, Block b, const CertifiedSum& sum_b, const CertifiedSum& mass_b);

/// JSON document; every numeral is a decimal string (integers exact, doubles
/// in shortest round-trip form).
std::string save(const BlockSet& set);

/// Inverse of save. Throws FormatError on malformed input or an invalid set.
BlockSet load(const std::string& document);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace twisted
