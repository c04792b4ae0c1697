#include "uotkit/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace uot::io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& tok, std::size_t line) {
  const std::string t = trim(tok);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw std::runtime_error("line " + std::to_string(line) + ": bad number '" + t + "'");
  return v;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string opt_cell(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

std::string time_cell(std::int64_t ns, bool timing) { return timing ? std::to_string(ns) : ""; }

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

DiscreteMeasure parse_measure_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  std::vector<double> xs, ws;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (!header) {
      if (t != "x,w") throw std::runtime_error("expected header 'x,w', got '" + t + "'");
      header = true;
      continue;
    }
    const auto comma = t.find(',');
    if (comma == std::string::npos || t.find(',', comma + 1) != std::string::npos)
      throw std::runtime_error("line " + std::to_string(lineno) + ": expected two columns");
    xs.push_back(parse_number(t.substr(0, comma), lineno));
    ws.push_back(parse_number(t.substr(comma + 1), lineno));
  }
  if (!header) throw std::runtime_error("missing header 'x,w'");
  try {
    return DiscreteMeasure(to_vector(xs), to_vector(ws));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("invalid measure: ") + e.what());
  }
}

DiscreteMeasure parse_measure_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    const auto xs = j.at("points").get<std::vector<double>>();
    const auto ws = j.at("weights").get<std::vector<double>>();
    return DiscreteMeasure(to_vector(xs), to_vector(ws));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("bad measure json: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("invalid measure: ") + e.what());
  }
}

DiscreteMeasure read_measure(const std::string& path) {
  if (ends_with(path, ".json")) return parse_measure_json(slurp(path));
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return parse_measure_csv(in);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void write_measure_csv(std::ostream& out, const DiscreteMeasure& m,
                       const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  out << "x,w\n";
  for (Eigen::Index i = 0; i < m.size(); ++i)
    out << format_double(m.points()[i]) << ',' << format_double(m.weights()[i]) << '\n';
}

void write_sinkhorn_trace(std::ostream& out, const std::vector<IterRecord>& trace, bool timing) {
  out << "iter,delta_f,err_f,err_g,wall_ns\n";
  for (std::size_t t = 0; t < trace.size(); ++t) {
    const auto& r = trace[t];
    out << t + 1 << ',' << format_double(r.delta_f) << ',' << opt_cell(r.err_f) << ','
        << opt_cell(r.err_g) << ',' << time_cell(r.wall_ns, timing) << '\n';
  }
}

void write_gap_trace(std::ostream& out, const std::vector<IterRecord>& trace, bool timing) {
  out << "iter,h0,fw_gap,pd_gap,wall_ns\n";
  for (std::size_t t = 0; t < trace.size(); ++t) {
    const auto& r = trace[t];
    out << t + 1 << ',' << format_double(r.h0) << ',' << format_double(r.fw_gap) << ','
        << format_double(r.pd_gap) << ',' << time_cell(r.wall_ns, timing) << '\n';
  }
}

void write_plan_csv(std::ostream& out, const SparsePlan& plan) {
  out << "i,j,mass\n";
  for (const auto& e : plan.entries) out << e.i << ',' << e.j << ',' << format_double(e.mass) << '\n';
}

void write_multiplan_csv(std::ostream& out, const MultiPlan& plan, std::size_t K) {
  for (std::size_t k = 0; k < K; ++k) out << 'i' << k + 1 << ',';
  out << "mass\n";
  for (const auto& e : plan.entries) {
    for (auto i : e.idx) out << i << ',';
    out << format_double(e.mass) << '\n';
  }
}

DualPair read_potentials(const std::string& path) {
  try {
    const auto j = nlohmann::json::parse(slurp(path));
    const auto f = j.at("f").get<std::vector<double>>();
    const auto g = j.at("g").get<std::vector<double>>();
    return {to_vector(f), to_vector(g)};
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": bad potentials json: " + e.what());
  }
}

void write_potentials(std::ostream& out, const DualPair& d) {
  nlohmann::ordered_json j;
  j["f"] = std::vector<double>(d.f.data(), d.f.data() + d.f.size());
  j["g"] = std::vector<double>(d.g.data(), d.g.data() + d.g.size());
  out << j.dump() << '\n';
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace uot::io
