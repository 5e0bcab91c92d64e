#include "lrmc/report.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lrmc/errors.hpp"

namespace lrmc {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

json record_json(const TraceRecord& r) {
  json j = {{"iter", r.iter},       {"cost", r.cost},         {"grad_norm", r.grad_norm},
            {"delta", r.delta},     {"accepted", r.accepted}, {"inner_iters", r.inner_iters},
            {"elapsed_ms", r.elapsed_ms}};
  j["tcg_stop"] = r.tcg_stop ? json(std::string(to_string(*r.tcg_stop))) : json(nullptr);
  return j;
}

json matrix_json(const MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixXd matrix_from(const json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError("expected a matrix", 0, where);
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[i];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw ParseError("ragged matrix", 0, where + "[" + std::to_string(i) + "]");
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!row[c].is_number())
        throw ParseError("expected a number", 0,
                         where + "[" + std::to_string(i) + "][" + std::to_string(c) + "]");
      m(i, c) = row[c].get<double>();
    }
  }
  return m;
}

}  // namespace

std::string write_solve_report(const SolveReport& report, bool include_traces) {
  json j;
  j["algorithm"] = report.algorithm;
  j["achieved_rank"] = report.achieved_rank;
  j["final_cost"] = report.final_cost;
  j["converged"] = report.converged;
  j["status"] = std::string(to_string(report.status));
  j["wall_time_s"] = report.wall_time;
  json stages = json::array();
  for (const auto& s : report.stages) {
    json st = {{"rank", s.rank},
               {"entry", std::string(to_string(s.entry))},
               {"rank_collapse", s.rank_collapse},
               {"escapes", s.escapes},
               {"init_cost", s.init_cost},
               {"final_cost", s.final_cost},
               {"iterations", s.iterations},
               {"stop_reason", std::string(to_string(s.reason))}};
    if (include_traces) {
      json tr = json::array();
      for (const auto& r : s.trace.records) tr.push_back(record_json(r));
      st["trace"] = std::move(tr);
    }
    stages.push_back(std::move(st));
  }
  j["stages"] = std::move(stages);
  if (report.rates) {
    j["rates"] = {{"channel_uses", report.rates->channel_uses},
                  {"per_message_rate", report.rates->per_message_rate},
                  {"symmetric_rate", report.rates->symmetric_rate}};
  }
  if (report.alignment) {
    const auto& a = *report.alignment;
    j["alignment"] = {{"feasible", a.feasible},
                      {"max_zero_violation", a.max_zero_violation},
                      {"min_signal_sv", a.min_signal_sv},
                      {"max_signal_deviation", a.max_signal_deviation},
                      {"tol", a.tol},
                      {"sv_floor", a.sv_floor}};
  }
  return j.dump(2) + "\n";
}

std::string write_design(const DeliveryDesign& design) {
  json j;
  j["channel_uses"] = design.channel_uses;
  json pre = json::array();
  for (const auto& p : design.precoders) pre.push_back(matrix_json(p));
  j["precoders"] = std::move(pre);
  json comb = json::array();
  for (const auto& c : design.combiners)
    comb.push_back({{"destination", c.destination + 1},
                    {"message", c.message + 1},
                    {"matrix", matrix_json(c.matrix)}});
  j["combiners"] = std::move(comb);
  return j.dump(2) + "\n";
}

DeliveryDesign read_design(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto line = 1 + std::count(text.begin(),
                                     text.begin() + std::min<std::size_t>(e.byte, text.size()), '\n');
    throw ParseError(std::string("invalid JSON: ") + e.what(), static_cast<int>(line));
  }
  if (!j.is_object()) throw ParseError("design must be a JSON object");
  DeliveryDesign d;
  try {
    d.channel_uses = j.at("channel_uses").get<int>();
    const json& pre = j.at("precoders");
    for (std::size_t i = 0; i < pre.size(); ++i)
      d.precoders.push_back(matrix_from(pre[i], "precoders[" + std::to_string(i) + "]"));
    const json& comb = j.at("combiners");
    for (std::size_t i = 0; i < comb.size(); ++i) {
      const std::string where = "combiners[" + std::to_string(i) + "]";
      Combiner c;
      c.destination = comb[i].at("destination").get<int>() - 1;
      c.message = comb[i].at("message").get<int>() - 1;
      c.matrix = matrix_from(comb[i].at("matrix"), where + ".matrix");
      d.combiners.push_back(std::move(c));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed design: ") + e.what());
  }
  if (d.channel_uses < 1) throw ParseError("channel_uses must be positive", 0, "channel_uses");
  return d;
}

std::string trace_csv(const SolveReport& report) {
  std::ostringstream os;
  os << "algorithm,rank,iter,cost,grad_norm,delta,accepted,tcg_stop,inner_iters,elapsed_ms\n";
  for (const auto& s : report.stages)
    for (const auto& r : s.trace.records)
      os << report.algorithm << ',' << s.rank << ',' << r.iter << ',' << format_double(r.cost)
         << ',' << format_double(r.grad_norm) << ',' << format_double(r.delta) << ','
         << (r.accepted ? 1 : 0) << ',' << (r.tcg_stop ? to_string(*r.tcg_stop) : "") << ','
         << r.inner_iters << ',' << format_double(r.elapsed_ms) << '\n';
  return os.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << content;
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace lrmc
