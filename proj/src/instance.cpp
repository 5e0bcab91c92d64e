#include "lrmc/instance.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include <json.hpp>

#include "lrmc/errors.hpp"

namespace lrmc {

namespace {

void canonicalize(std::vector<int>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

CachingInstance CachingInstance::build(int num_messages, std::vector<int> streams,
                                       std::vector<Destination> destinations) {
  if (num_messages < 1) throw RangeError("instance needs at least one message");
  if (static_cast<int>(streams.size()) != num_messages)
    throw RangeError("streams has " + std::to_string(streams.size()) + " entries, expected " +
                     std::to_string(num_messages));
  for (std::size_t i = 0; i < streams.size(); ++i)
    if (streams[i] < 1)
      throw RangeError("message " + std::to_string(i + 1) + " has stream count " +
                       std::to_string(streams[i]));
  if (destinations.empty()) throw RangeError("instance needs at least one destination");

  for (std::size_t k = 0; k < destinations.size(); ++k) {
    auto& d = destinations[k];
    canonicalize(d.desired);
    canonicalize(d.cached);
    const auto tag = "destination " + std::to_string(k + 1);
    for (int i : d.desired)
      if (i < 0 || i >= num_messages)
        throw IndexError(tag + ": desired index " + std::to_string(i + 1) + " out of range");
    for (int j : d.cached)
      if (j < 0 || j >= num_messages)
        throw IndexError(tag + ": cached index " + std::to_string(j + 1) + " out of range");
    if (d.desired.empty()) throw EmptyDesired(tag + " desires no message");
    std::vector<int> both;
    std::set_intersection(d.desired.begin(), d.desired.end(), d.cached.begin(), d.cached.end(),
                          std::back_inserter(both));
    if (!both.empty())
      throw OverlapError(tag + " both desires and caches message " + std::to_string(both[0] + 1));
  }

  CachingInstance inst;
  inst.num_messages_ = num_messages;
  inst.streams_ = std::move(streams);
  inst.destinations_ = std::move(destinations);
  return inst;
}

bool CachingInstance::is_cached(int destination, int message) const {
  const auto& c = destinations_.at(destination).cached;
  return std::binary_search(c.begin(), c.end(), message);
}

bool CachingInstance::uniform_streams() const noexcept {
  return std::adjacent_find(streams_.begin(), streams_.end(), std::not_equal_to<>()) ==
         streams_.end();
}

int CachingInstance::total_streams() const noexcept {
  return std::accumulate(streams_.begin(), streams_.end(), 0);
}

CachingInstance random_unicast_instance(int num_messages, int cache_size, int streams,
                                        std::uint64_t seed) {
  if (num_messages < 1) throw RangeError("K must be positive");
  if (cache_size < 0 || cache_size >= num_messages)
    throw RangeError("cache size " + std::to_string(cache_size) + " outside [0, " +
                     std::to_string(num_messages - 1) + "]");
  if (streams < 1) throw RangeError("stream count must be positive");

  std::mt19937_64 rng(seed);
  std::vector<Destination> dests(num_messages);
  std::vector<int> others;
  others.reserve(num_messages - 1);
  for (int k = 0; k < num_messages; ++k) {
    others.clear();
    for (int j = 0; j < num_messages; ++j)
      if (j != k) others.push_back(j);
    // partial Fisher-Yates
    for (int t = 0; t < cache_size; ++t) {
      std::uniform_int_distribution<int> pick(t, static_cast<int>(others.size()) - 1);
      std::swap(others[t], others[pick(rng)]);
    }
    dests[k].desired = {k};
    dests[k].cached.assign(others.begin(), others.begin() + cache_size);
  }
  return CachingInstance::build(num_messages, std::vector<int>(num_messages, streams),
                                std::move(dests));
}

// --- serialization -------------------------------------------------------

namespace {

using nlohmann::json;

int line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + byte, '\n'));
}

int as_int(const json& j, const std::string& field) {
  if (!j.is_number_integer()) throw ParseError("expected an integer", 0, field);
  return j.get<int>();
}

std::vector<int> as_index_list(const json& j, const std::string& field) {
  if (!j.is_array()) throw ParseError("expected an array of integers", 0, field);
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(as_int(j[i], field + "[" + std::to_string(i) + "]") - 1);
  return out;
}

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed,
                    const std::string& where) {
  for (const auto& [key, _] : obj.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ParseError("unknown member '" + key + "'", 0, where.empty() ? key : where + "." + key);
}

}  // namespace

CachingInstance read_instance(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), line_of(text, e.byte == 0 ? 0 : e.byte - 1));
  }
  if (!doc.is_object()) throw ParseError("top level must be an object", 1);
  reject_unknown(doc, {"K", "streams", "destinations"}, "");
  for (const char* key : {"K", "streams", "destinations"})
    if (!doc.contains(key)) throw ParseError("missing member", 0, key);

  const int k = as_int(doc["K"], "K");
  std::vector<int> streams;
  if (!doc["streams"].is_array()) throw ParseError("expected an array", 0, "streams");
  for (std::size_t i = 0; i < doc["streams"].size(); ++i)
    streams.push_back(as_int(doc["streams"][i], "streams[" + std::to_string(i) + "]"));

  const auto& jd = doc["destinations"];
  if (!jd.is_array()) throw ParseError("expected an array", 0, "destinations");
  std::vector<Destination> dests;
  for (std::size_t k2 = 0; k2 < jd.size(); ++k2) {
    const auto where = "destinations[" + std::to_string(k2) + "]";
    const auto& obj = jd[k2];
    if (!obj.is_object()) throw ParseError("expected an object", 0, where);
    reject_unknown(obj, {"desired", "cached"}, where);
    if (!obj.contains("desired")) throw ParseError("missing member", 0, where + ".desired");
    Destination d;
    d.desired = as_index_list(obj["desired"], where + ".desired");
    if (obj.contains("cached")) d.cached = as_index_list(obj["cached"], where + ".cached");
    dests.push_back(std::move(d));
  }

  try {
    return CachingInstance::build(k, std::move(streams), std::move(dests));
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(std::string("invalid instance: ") + e.what());
  }
}

std::string write_instance(const CachingInstance& instance) {
  // Hand-rolled so the canonical form keeps K, streams, destinations in
  // reading order with one destination per line.
  auto list = [](const std::vector<int>& v, int offset) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ", ";
      s += std::to_string(v[i] + offset);
    }
    return s + "]";
  };
  std::string out = "{\n";
  out += "  \"K\": " + std::to_string(instance.num_messages()) + ",\n";
  out += "  \"streams\": " + list(instance.streams(), 0) + ",\n";
  out += "  \"destinations\": [\n";
  const auto& d = instance.destinations();
  for (std::size_t k = 0; k < d.size(); ++k) {
    out += "    {\"desired\": " + list(d[k].desired, 1) + ", \"cached\": " + list(d[k].cached, 1) +
           "}";
    out += k + 1 < d.size() ? ",\n" : "\n";
  }
  out += "  ]\n}\n";
  return out;
}

// --- completion problem --------------------------------------------------

ObservationPattern ObservationPattern::from_entries(int rows, int cols,
                                                    std::vector<std::pair<int, int>> entries) {
  for (const auto& [i, j] : entries)
    if (i < 0 || i >= rows || j < 0 || j >= cols)
      throw IndexError("observed entry (" + std::to_string(i) + "," + std::to_string(j) +
                       ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
  std::sort(entries.begin(), entries.end());
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());

  ObservationPattern p;
  p.rows = rows;
  p.cols = cols;
  p.row.reserve(entries.size());
  p.col.reserve(entries.size());
  for (const auto& [i, j] : entries) {
    p.row.push_back(i);
    p.col.push_back(j);
  }
  p.row_ptr.assign(rows + 1, 0);
  p.col_ptr.assign(cols + 1, 0);
  for (std::size_t e = 0; e < entries.size(); ++e) {
    ++p.row_ptr[p.row[e] + 1];
    ++p.col_ptr[p.col[e] + 1];
  }
  std::partial_sum(p.row_ptr.begin(), p.row_ptr.end(), p.row_ptr.begin());
  std::partial_sum(p.col_ptr.begin(), p.col_ptr.end(), p.col_ptr.begin());
  p.col_order.resize(entries.size());
  std::vector<int> fill(p.col_ptr.begin(), p.col_ptr.end() - 1);
  for (std::size_t e = 0; e < entries.size(); ++e) p.col_order[fill[p.col[e]]++] = static_cast<int>(e);
  return p;
}

CompletionProblem::CompletionProblem(int rows, int cols,
                                     const std::vector<std::tuple<int, int, double>>& observed) {
  if (rows < 1 || cols < 1) throw RangeError("problem dimensions must be positive");
  std::vector<std::pair<int, int>> entries;
  for (const auto& [i, j, v] : observed) entries.emplace_back(i, j);
  auto pattern = std::make_shared<ObservationPattern>(
      ObservationPattern::from_entries(rows, cols, entries));
  if (pattern->size() != observed.size()) throw IndexError("duplicate observed entry");
  target_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pattern->size()));
  for (const auto& [i, j, v] : observed) {
    const auto* first = pattern->col.data() + pattern->row_ptr[i];
    const auto* last = pattern->col.data() + pattern->row_ptr[i + 1];
    target_[std::lower_bound(first, last, j) - pattern->col.data()] = v;
  }
  pattern_ = std::move(pattern);
}

CompletionProblem::CompletionProblem(std::shared_ptr<const ObservationPattern> pattern,
                                     Eigen::VectorXd target, std::vector<RowBlock> row_blocks,
                                     std::vector<ColBlock> col_blocks)
    : pattern_(std::move(pattern)),
      target_(std::move(target)),
      row_blocks_(std::move(row_blocks)),
      col_blocks_(std::move(col_blocks)) {
  if (static_cast<std::size_t>(target_.size()) != pattern_->size())
    throw DimensionMismatch("target size does not match the observation pattern");
}

Eigen::MatrixXd CompletionProblem::dense_target() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows(), cols());
  for (std::size_t e = 0; e < num_observed(); ++e)
    out(pattern_->row[e], pattern_->col[e]) = target_[static_cast<Eigen::Index>(e)];
  return out;
}

Eigen::MatrixXd CompletionProblem::dense_mask() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows(), cols());
  for (std::size_t e = 0; e < num_observed(); ++e) out(pattern_->row[e], pattern_->col[e]) = 1.0;
  return out;
}

CompletionProblem build_completion_problem(const CachingInstance& instance) {
  const auto& streams = instance.streams();
  std::vector<ColBlock> col_blocks;
  int col = 0;
  for (int j = 0; j < instance.num_messages(); ++j) {
    col_blocks.push_back({col, col + streams[j], j});
    col += streams[j];
  }

  std::vector<RowBlock> row_blocks;
  int row = 0;
  for (int k = 0; k < instance.num_destinations(); ++k)
    for (int i : instance.destinations()[k].desired) {
      row_blocks.push_back({row, row + streams[i], k, i});
      row += streams[i];
    }

  std::vector<std::pair<int, int>> entries;
  std::vector<double> values;
  for (const auto& rb : row_blocks)
    for (int r = rb.begin; r < rb.end; ++r)
      for (const auto& cb : col_blocks) {
        if (instance.is_cached(rb.destination, cb.message)) continue;
        for (int c = cb.begin; c < cb.end; ++c) {
          entries.emplace_back(r, c);
          const bool diag = cb.message == rb.message && (r - rb.begin) == (c - cb.begin);
          values.push_back(diag ? 1.0 : 0.0);
        }
      }
  // Entries are generated in (row, col) order, so `values` already matches
  // the sorted pattern.
  auto pattern = std::make_shared<ObservationPattern>(
      ObservationPattern::from_entries(row, col, std::move(entries)));
  Eigen::VectorXd target = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  return CompletionProblem(std::move(pattern), std::move(target), std::move(row_blocks),
                           std::move(col_blocks));
}

}  // namespace lrmc
