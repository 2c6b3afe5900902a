#include "twisted/setrep.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "twisted/errors.hpp"

namespace twisted {

using nlohmann::json;

Block::Block(BigInt start, BigInt len) : start_(std::move(start)), len_(std::move(len)) {
  if (start_ < 2) throw InvalidArgument("start", "block start must be >= 2, got " + to_decimal(start_));
  if (len_ < 1) throw InvalidArgument("len", "block length must be >= 1, got " + to_decimal(len_));
}

std::string Block::str() const { return "[" + to_decimal(start_) + ", " + to_decimal(end()) + ")"; }

BigInt BlockSet::element_count() const {
  BigInt n = 0;
  for (const auto& b : blocks_) n += b.len();
  return n;
}

BigInt BlockSet::next_free() const { return blocks_.empty() ? BigInt(2) : blocks_.back().end(); }

BlockSet append_block(BlockSet set, Block b, const CertifiedSum& sum_b, const CertifiedSum& mass_b) {
  if (!set.blocks_.empty() && b.start() < set.blocks_.back().end()) {
    throw OverlapError("block " + b.str() + " overlaps or precedes block " + set.blocks_.back().str());
  }
  set.total_sum_ = set.total_sum_ + sum_b;
  set.total_mass_ = set.total_mass_ + mass_b;
  set.blocks_.push_back(std::move(b));
  return set;
}

std::string save(const BlockSet& set) {
  json blocks = json::array();
  for (const auto& b : set.blocks()) {
    blocks.push_back({{"start", to_decimal(b.start())}, {"len", to_decimal(b.len())}});
  }
  const json doc = {
      {"t", format_double(set.t())},
      {"blocks", std::move(blocks)},
      {"total_mass",
       {{"value", format_double(set.total_mass().value.real())}, {"err", format_double(set.total_mass().err)}}},
      {"total_sum",
       {{"re", format_double(set.total_sum().value.real())},
        {"im", format_double(set.total_sum().value.imag())},
        {"err", format_double(set.total_sum().err)}}},
  };
  return doc.dump(2) + "\n";
}

namespace {

std::string field_string(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
  const json& v = obj.at(key);
  if (!v.is_string()) throw FormatError(std::string("field '") + key + "' must be a decimal string");
  return v.get<std::string>();
}

double field_double(const json& obj, const char* key) {
  const double x = parse_double(field_string(obj, key));
  if (!std::isfinite(x)) throw FormatError(std::string("field '") + key + "' is not finite");
  return x;
}

double field_err(const json& obj, const char* key) {
  const double e = field_double(obj, key);
  if (e < 0) throw FormatError(std::string("error bound '") + key + "' is negative");
  return e;
}

}  // namespace

BlockSet load(const std::string& document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw FormatError("document must be a JSON object");

  BlockSet set(field_double(doc, "t"));
  if (!doc.contains("blocks") || !doc.at("blocks").is_array()) throw FormatError("missing array 'blocks'");
  for (const json& entry : doc.at("blocks")) {
    BigInt start = parse_decimal(field_string(entry, "start"));
    BigInt len = parse_decimal(field_string(entry, "len"));
    if (start < 2) throw FormatError("block start " + to_decimal(start) + " is below 2");
    if (len < 1) throw FormatError("block length must be >= 1");
    Block b(std::move(start), std::move(len));
    if (!set.blocks_.empty() && b.start() < set.blocks_.back().end()) {
      throw FormatError("block " + b.str() + " overlaps or precedes block " + set.blocks_.back().str());
    }
    set.blocks_.push_back(std::move(b));
  }

  if (!doc.contains("total_mass")) throw FormatError("missing field 'total_mass'");
  if (!doc.contains("total_sum")) throw FormatError("missing field 'total_sum'");
  const json& mass = doc.at("total_mass");
  const json& sum = doc.at("total_sum");
  set.total_mass_ = {{field_double(mass, "value"), 0.0}, field_err(mass, "err")};
  set.total_sum_ = {{field_double(sum, "re"), field_double(sum, "im")}, field_err(sum, "err")};
  return set;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out << contents;
  if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace twisted
