#include "contractkit/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "contractkit/error.hpp"

namespace ck {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, path + ": cannot open");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Json read_json(const std::string& path) {
  std::string text = read_file(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

bool starts_with(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }

std::size_t parse_count(const std::string& token, const std::string& context) {
  std::size_t v = 0;
  auto r = std::from_chars(token.data(), token.data() + token.size(), v);
  if (r.ec != std::errc() || r.ptr != token.data() + token.size() || token.empty())
    throw Error(ErrorCode::ParseError, context + ": expected a nonnegative integer, got '" + token + "'");
  return v;
}

const Json& field(const Json& j, const char* key, const std::string& context) {
  if (!j.is_object() || !j.contains(key))
    throw Error(ErrorCode::ParseError, context + ": missing field '" + key + "'");
  return j.at(key);
}

double json_double(const Json& j, const std::string& context) {
  if (!j.is_number()) throw Error(ErrorCode::ParseError, context + ": expected a number");
  return j.get<double>();
}

std::size_t json_size(const Json& j, const std::string& context) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
    throw Error(ErrorCode::ParseError, context + ": expected a nonnegative integer");
  return j.get<std::size_t>();
}

// Constructor domain errors become validation errors with file context.
template <class F>
auto validated(const std::string& context, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Domain) throw;
    std::string msg = e.what();
    auto pos = msg.find(": ");
    throw Error(ErrorCode::ValidationError, context + ": " + (pos == std::string::npos ? msg : msg.substr(pos + 2)));
  }
}

}  // namespace

double parse_real(const std::string& token, const std::string& context) {
  double v = 0.0;
  auto r = std::from_chars(token.data(), token.data() + token.size(), v);
  if (r.ec != std::errc() || r.ptr != token.data() + token.size() || token.empty())
    throw Error(ErrorCode::ParseError, context + ": expected a number, got '" + token + "'");
  return v;
}

static std::string trimmed(const std::string& s) {
  auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return {};
  return s.substr(a, s.find_last_not_of(" \t") - a + 1);
}

std::vector<double> parse_real_list(const std::string& csv, const std::string& context) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(parse_real(trimmed(tok), context));
  return out;
}

std::vector<std::size_t> parse_index_list(const std::string& csv, const std::string& context) {
  std::vector<std::size_t> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(parse_count(trimmed(tok), context));
  return out;
}

Dist parse_dist(const Json& j, const std::string& context) {
  std::size_t n = json_size(field(j, "alphabet_size", context), context + ": alphabet_size");
  const Json& m = field(j, "mass", context);
  if (!m.is_array() || m.size() != n)
    throw Error(ErrorCode::ValidationError, context + ": mass must list alphabet_size entries");
  Vec v(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    std::string where = context + ": mass[" + std::to_string(i) + "]";
    v[static_cast<Eigen::Index>(i)] = json_double(m[i], where);
    if (v[static_cast<Eigen::Index>(i)] < 0.0) throw Error(ErrorCode::ValidationError, where + " is negative");
  }
  std::vector<std::string> names;
  if (j.contains("names")) names = j.at("names").get<std::vector<std::string>>();
  return validated(context, [&] { return Dist(Alphabet(n, names), v); });
}

Dist load_dist(const std::string& spec) {
  const std::string ctx = "distribution '" + spec + "'";
  if (spec == "bern_half") return Dist::bern(0.5);
  if (starts_with(spec, "bern_")) {
    double p = parse_real(spec.substr(5), ctx);
    return validated(ctx, [&] { return Dist::bern(p); });
  }
  if (starts_with(spec, "uniform_")) {
    std::size_t n = parse_count(spec.substr(8), ctx);
    if (n == 0) throw Error(ErrorCode::ValidationError, ctx + ": empty alphabet");
    return Dist::uniform(n);
  }
  return parse_dist(read_json(spec), spec);
}

Channel parse_channel(const Json& j, const std::string& context) {
  std::size_t n = json_size(field(j, "input_size", context), context + ": input_size");
  std::size_t m = json_size(field(j, "output_size", context), context + ": output_size");
  const Json& rows = field(j, "rows", context);
  if (!rows.is_array() || rows.size() != n)
    throw Error(ErrorCode::ValidationError, context + ": rows must list input_size entries");
  Mat k(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  for (std::size_t x = 0; x < n; ++x) {
    std::string where = context + ": rows[" + std::to_string(x) + "]";
    if (!rows[x].is_array() || rows[x].size() != m)
      throw Error(ErrorCode::ValidationError, where + " must have output_size entries");
    double sum = 0.0;
    for (std::size_t y = 0; y < m; ++y) {
      double v = json_double(rows[x][y], where);
      if (v < 0.0) throw Error(ErrorCode::ValidationError, where + "[" + std::to_string(y) + "] is negative");
      k(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) = v;
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      std::ostringstream os;
      os.precision(17);
      os << where << " sums to " << sum;
      throw Error(ErrorCode::ValidationError, os.str());
    }
  }
  return validated(context, [&] { return Channel(Alphabet(n), Alphabet(m), k); });
}

Channel load_channel(const std::string& spec) {
  const std::string ctx = "channel '" + spec + "'";
  if (starts_with(spec, "bsc_")) {
    double e = parse_real(spec.substr(4), ctx);
    return validated(ctx, [&] { return Channel::bsc(e); });
  }
  if (starts_with(spec, "identity_")) {
    std::size_t n = parse_count(spec.substr(9), ctx);
    if (n == 0) throw Error(ErrorCode::ValidationError, ctx + ": empty alphabet");
    return Channel::identity(n);
  }
  return parse_channel(read_json(spec), spec);
}

Graph parse_graph(const std::string& text, const std::string& context) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool have_n = false;
  std::size_t n = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::vector<std::string> toks;
    for (std::string t; ls >> t;) toks.push_back(t);
    if (toks.empty()) continue;
    std::string where = context + ":" + std::to_string(lineno);
    if (!have_n) {
      if (toks.size() != 1) throw Error(ErrorCode::ParseError, where + ": expected the vertex count");
      n = parse_count(toks[0], where);
      have_n = true;
      continue;
    }
    if (toks.size() != 2) throw Error(ErrorCode::ParseError, where + ": expected 'u v'");
    std::size_t u = parse_count(toks[0], where), v = parse_count(toks[1], where);
    if (u >= n || v >= n) throw Error(ErrorCode::ValidationError, where + ": vertex out of range");
    edges.emplace_back(u, v);
  }
  if (!have_n) throw Error(ErrorCode::ParseError, context + ": empty graph file");
  return validated(context, [&] { return Graph(n, edges); });
}

Graph load_graph(const std::string& path) {
  if (starts_with(path, "path_")) return Graph::path(parse_count(path.substr(5), path));
  if (starts_with(path, "complete_")) return Graph::complete(parse_count(path.substr(9), path));
  return parse_graph(read_file(path), path);
}

Json number(double v, const ReportStyle& style) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (style.exact) return v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

Json vector_json(const Vec& v, const ReportStyle& style) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i], style));
  return a;
}

Json matrix_json(const Mat& m, const ReportStyle& style) {
  Json a = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vector_json(m.row(r).transpose(), style));
  return a;
}

Json dist_json(const Dist& d, const ReportStyle& style) {
  Json j;
  j["alphabet_size"] = d.size();
  j["mass"] = vector_json(d.mass(), style);
  return j;
}

Json channel_json(const Channel& k, const ReportStyle& style) {
  Json j;
  j["input_size"] = k.inputs();
  j["output_size"] = k.outputs();
  j["rows"] = matrix_json(k.rows(), style);
  return j;
}

double json_real(const Json& j) {
  if (j.is_string()) {
    auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw Error(ErrorCode::ParseError, "unexpected string '" + s + "' for a number");
  }
  if (!j.is_number()) throw Error(ErrorCode::ParseError, "expected a number");
  return j.get<double>();
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace ck
