#include "strongstab/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "strongstab/lmi.hpp"

namespace strongstab::cli {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void parse_fail(const std::string& origin, const std::string& what) {
  throw Error(ErrorCode::ParseError, origin + ": " + what);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// nlohmann reports a byte offset; turn it into line:column.
std::string position(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return std::to_string(line) + ":" + std::to_string(column);
}

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::string msg = e.what();
    if (auto at = msg.find("] "); at != std::string::npos) msg = msg.substr(at + 2);
    throw Error(ErrorCode::ParseError, origin + ":" + position(text, e.byte) + ": " + msg);
  }
}

Polynomial polynomial_from_json(const json& j, const std::string& what) {
  if (j.is_number()) return {j.get<double>()};
  if (!j.is_array() || j.empty()) {
    throw Error(ErrorCode::ParseError, what + ": expected a non-empty coefficient array");
  }
  Polynomial p;
  for (const json& c : j) {
    if (!c.is_number()) throw Error(ErrorCode::ParseError, what + ": coefficient is not a number");
    p.push_back(c.get<double>());
  }
  return p;
}

RationalFunction rational_from_json(const json& j, const std::string& what) {
  if (!j.is_object() || !j.contains("num") || !j.contains("den")) {
    throw Error(ErrorCode::ParseError, what + ": expected {\"num\": [...], \"den\": [...]}");
  }
  return {polynomial_from_json(j.at("num"), what + ".num"),
          polynomial_from_json(j.at("den"), what + ".den")};
}

Index index_field(const json& j, const char* key, const std::string& origin) {
  if (!j.contains(key)) parse_fail(origin, std::string("partition is missing \"") + key + "\"");
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    parse_fail(origin, std::string("partition.") + key + " must be a non-negative integer");
  }
  return static_cast<Index>(v.get<long long>());
}

/// Empty blocks are written as [] and take their shape from the rest of the
/// plant, so a zero-sized block never fails the shape check.
Matrix conform(Matrix m, Index rows, Index cols, const char* key, const std::string& origin) {
  if (m.size() == 0 && rows * cols == 0) return Matrix::Zero(rows, cols);
  if (m.rows() != rows || m.cols() != cols) {
    parse_fail(origin, std::string(key) + " has shape " + std::to_string(m.rows()) + "x" +
                           std::to_string(m.cols()) + ", expected " + std::to_string(rows) + "x" +
                           std::to_string(cols));
  }
  return m;
}

Matrix block(const json& doc, const char* key, const std::string& origin, bool required = true) {
  if (!doc.contains(key)) {
    if (required) parse_fail(origin, std::string("missing \"") + key + "\"");
    return Matrix();
  }
  try {
    return matrix_from_json(doc.at(key), key);
  } catch (const Error& e) {
    parse_fail(origin, e.what());
  }
}

Index first_nonzero(std::initializer_list<Index> sizes) {
  for (Index s : sizes) {
    if (s > 0) return s;
  }
  return 0;
}

GeneralizedPlant plant_from_blocks(const json& doc, const std::string& origin) {
  const Matrix A = block(doc, "A", origin);
  if (A.rows() != A.cols()) parse_fail(origin, "A is not square");
  const Matrix B1 = block(doc, "B1", origin), B2 = block(doc, "B2", origin);
  const Matrix C1 = block(doc, "C1", origin), C2 = block(doc, "C2", origin);
  const Matrix D11 = block(doc, "D11", origin), D12 = block(doc, "D12", origin);
  const Matrix D21 = block(doc, "D21", origin);
  const Index n = A.rows();
  const Index m1 = first_nonzero({B1.cols(), D11.cols(), D21.cols()});
  const Index m2 = first_nonzero({B2.cols(), D12.cols()});
  const Index p1 = first_nonzero({C1.rows(), D11.rows(), D12.rows()});
  const Index p2 = first_nonzero({C2.rows(), D21.rows()});
  if (doc.contains("D22")) {
    const Matrix D22 = conform(block(doc, "D22", origin), p2, m2, "D22", origin);
    if (!D22.isZero(0.0)) parse_fail(origin, "D22 must be zero");
  }
  return GeneralizedPlant::from_blocks(
      A, conform(B1, n, m1, "B1", origin), conform(B2, n, m2, "B2", origin),
      conform(C1, p1, n, "C1", origin), conform(C2, p2, n, "C2", origin),
      conform(D11, p1, m1, "D11", origin), conform(D12, p1, m2, "D12", origin),
      conform(D21, p2, m1, "D21", origin));
}

GeneralizedPlant plant_from_plain(const json& doc, const std::string& origin) {
  const Matrix A = block(doc, "A", origin);
  if (A.rows() != A.cols()) parse_fail(origin, "A is not square");
  const Index n = A.rows();
  const Matrix B = block(doc, "B", origin), C = block(doc, "C", origin);
  const Index m = B.cols(), p = C.rows();
  conform(B, n, m, "B", origin);
  conform(C, p, n, "C", origin);
  if (doc.contains("D")) {
    const Matrix D = conform(block(doc, "D", origin), p, m, "D", origin);
    if (!D.isZero(0.0)) parse_fail(origin, "D must be zero (strictly proper u→y channel)");
  }
  return GeneralizedPlant(StateSpace(A, B, C, Matrix::Zero(p, m)), 0, m, 0, p);
}

GeneralizedPlant plant_from_tf(const json& doc, const std::string& origin) {
  const json& rows = doc.at("tf");
  if (!rows.is_array() || rows.empty()) parse_fail(origin, "tf must be a non-empty array of rows");
  if (!doc.contains("partition")) parse_fail(origin, "tf plants need a \"partition\"");
  const json& part = doc.at("partition");
  const Index m1 = index_field(part, "m1", origin), m2 = index_field(part, "m2", origin);
  const Index p1 = index_field(part, "p1", origin), p2 = index_field(part, "p2", origin);
  const Index r = static_cast<Index>(rows.size());
  const Index c = rows.front().is_array() ? static_cast<Index>(rows.front().size()) : 0;
  if (r != p1 + p2 || c != m1 + m2) {
    parse_fail(origin, "tf is " + std::to_string(r) + "x" + std::to_string(c) +
                           " but partition implies " + std::to_string(p1 + p2) + "x" +
                           std::to_string(m1 + m2));
  }
  std::vector<RationalFunction> entries;
  for (Index i = 0; i < r; ++i) {
    const json& row = rows.at(i);
    if (!row.is_array() || static_cast<Index>(row.size()) != c) {
      parse_fail(origin, "tf row " + std::to_string(i) + " has the wrong length");
    }
    for (Index k = 0; k < c; ++k) {
      try {
        entries.push_back(
            rational_from_json(row.at(k), "tf[" + std::to_string(i) + "][" + std::to_string(k) + "]"));
      } catch (const Error& e) {
        parse_fail(origin, e.what());
      }
    }
  }
  StateSpace ss = tf_to_ss(TransferMatrix(r, c, std::move(entries)));
  if (!ss.D.bottomRightCorner(p2, m2).isZero(0.0)) {
    parse_fail(origin, "the u→y block of tf must be strictly proper");
  }
  return GeneralizedPlant(std::move(ss), m1, m2, p1, p2);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ParseError, path.string() + ": cannot write");
  out << text;
}

/// NaN and ±inf have no JSON literal; they are written as null and strings.
json number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

json state_space_json(const StateSpace& S) {
  return {{"A", to_json(S.A)}, {"B", to_json(S.B)}, {"C", to_json(S.C)}, {"D", to_json(S.D)}};
}

json report_header(const std::string& command, const RunConfig& config) {
  return {{"tool", "strongstab"},
          {"version", STRONGSTAB_VERSION},
          {"command", command},
          {"seed", config.seed},
          {"config", config.snapshot()}};
}

/// Certificates recomputed from the serialized controller alone.
json recompute_closed_loop(const GeneralizedPlant& P, const StateSpace& K, double bound,
                           const RunConfig& config) {
  const StateSpace cl = lft_lower(P, K);
  const double cl_abscissa = spectral_abscissa(cl.A);
  json j = {{"controller_abscissa", number(K.states() ? spectral_abscissa(K.A) : -std::numeric_limits<double>::infinity())},
            {"closed_loop_abscissa", number(cl_abscissa)},
            {"bound", number(bound)}};
  if (cl_abscissa < 0.0 && cl.inputs() > 0 && cl.outputs() > 0) {
    const double norm = hinf_norm(cl);
    j["closed_loop_hinf_norm"] = norm;
    j["closed_loop_random_peak"] = random_frequency_peak(cl, config.seed);
    j["closed_loop_norm_below_bound"] = norm < bound;
  }
  return j;
}

json strongstab_result_json(const StrongStabResult& r) {
  const StrongStabCertificates& c = r.certificates;
  return {{"gamma_K", number(r.gamma_K)},
          {"gamma_K_infeasible_below", number(r.gamma_K_infeasible_below)},
          {"X", to_json(r.X)},
          {"X_K", to_json(r.X_K)},
          {"Z", to_json(r.Z)},
          {"controller", state_space_json(r.controller)},
          {"solver_iterations", r.solver_iterations},
          {"certificates",
           {{"A_X_abscissa", number(c.A_X_abscissa)},
            {"A_Z_abscissa", number(c.A_Z_abscissa)},
            {"controller_abscissa", number(c.controller_abscissa)},
            {"closed_loop_abscissa", number(c.closed_loop_abscissa)},
            {"spectrum_split_error", number(c.spectrum_split_error)},
            {"controller_hinf_norm", number(c.controller_hinf_norm)},
            {"lmi_margin", number(c.lmi_margin)},
            {"riccati_residual", number(c.riccati_residual)}}}};
}

json hinf_certificates_json(const StableHinfCertificates& c, double gamma) {
  return {{"controller_abscissa", number(c.controller_abscissa)},
          {"closed_loop_abscissa", number(c.closed_loop_abscissa)},
          {"closed_loop_norm", number(c.closed_loop_norm)},
          {"crosscheck_error", number(c.crosscheck_error)},
          {"parameter_norm", number(c.parameter_norm)},
          {"hold", c.hold(gamma)}};
}

json probes_json(const std::vector<GammaProbe>& probes) {
  json out = json::array();
  for (const GammaProbe& p : probes) {
    out.push_back({{"gamma", p.gamma}, {"feasible", p.feasible}, {"reason", p.reason}});
  }
  return out;
}

json report_json(const bench::SynthesisReport& r) {
  json expectations = json::array();
  for (const bench::Expectation& e : r.expectations) {
    expectations.push_back({{"name", e.name},
                            {"expected", e.expected},
                            {"tolerance", e.tolerance},
                            {"actual", number(e.actual)},
                            {"sense", e.sense == bench::Expectation::Sense::AtMost ? "at_most" : "within"},
                            {"pass", e.pass()}});
  }
  return {{"name", r.name},
          {"parameters", r.parameters},
          {"plant_order", r.plant_order},
          {"controller_order", r.controller_order},
          {"gamma_opt", number(r.gamma_opt)},
          {"gamma_min", number(r.gamma_min)},
          {"gamma_structured", number(r.gamma_structured)},
          {"certificates", hinf_certificates_json(r.certificates, r.gamma_min)},
          {"probes", probes_json(r.probes)},
          {"non_monotone", r.non_monotone},
          {"expectations", expectations},
          {"runtime_seconds", r.runtime_seconds},
          {"notes", r.notes},
          {"passed", r.passed()},
          {"controller", state_space_json(r.controller)}};
}

json sweep_json(const std::vector<bench::SweepRow>& rows) {
  json out = json::array();
  for (const bench::SweepRow& r : rows) {
    out.push_back({{"alpha", r.alpha},
                   {"pip", r.pip},
                   {"gamma_k_lmi", number(r.gamma_lmi)},
                   {"gamma_k_structured", number(r.gamma_structured)},
                   {"dominance", r.dominance_holds()},
                   {"status", r.status}});
  }
  return out;
}

fs::path out_path(const RunConfig& config, const std::string& file) {
  return fs::path(config.out_dir) / file;
}

double env_double(const char* name, double fallback) {
  const char* v = std::getenv(name);
  if (!v || !*v) return fallback;
  char* end = nullptr;
  const double d = std::strtod(v, &end);
  if (end == v || *end != '\0') {
    throw Error(ErrorCode::ParseError, std::string(name) + ": not a number: " + v);
  }
  return d;
}

StateSpace weight_from_json(const json& j, const std::string& what) {
  if (j.is_object() && j.contains("A")) {
    return StateSpace(matrix_from_json(j.at("A"), what + ".A"), matrix_from_json(j.at("B"), what + ".B"),
                      matrix_from_json(j.at("C"), what + ".C"), matrix_from_json(j.at("D"), what + ".D"));
  }
  return tf_to_ss(TransferMatrix(1, 1, {rational_from_json(j, what)}));
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }
}

}  // namespace

// ---- serialization ---------------------------------------------------------

json to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, const std::string& what) {
  if (j.is_number()) return Matrix::Constant(1, 1, j.get<double>());
  if (!j.is_array()) throw Error(ErrorCode::ParseError, what + ": expected nested arrays");
  if (j.empty()) return Matrix();
  const Index rows = static_cast<Index>(j.size());
  if (!j.front().is_array()) throw Error(ErrorCode::ParseError, what + ": rows must be arrays");
  const Index cols = static_cast<Index>(j.front().size());
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const json& row = j.at(i);
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      throw Error(ErrorCode::ParseError, what + ": ragged row " + std::to_string(i));
    }
    for (Index k = 0; k < cols; ++k) {
      if (!row.at(k).is_number()) {
        throw Error(ErrorCode::ParseError,
                    what + "[" + std::to_string(i) + "][" + std::to_string(k) + "] is not a number");
      }
      m(i, k) = row.at(k).get<double>();
    }
  }
  return m;
}

std::string format6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

PlantFile parse_plant(const std::string& text, const std::string& origin) {
  const json doc = parse_json(text, origin);
  if (!doc.is_object()) parse_fail(origin, "top level must be an object");
  PlantFile file;
  file.name = doc.value("name", fs::path(origin).stem().string());
  if (doc.contains("tf")) {
    file.plant = plant_from_tf(doc, origin);
  } else if (doc.contains("B1") || doc.contains("B2")) {
    file.plant = plant_from_blocks(doc, origin);
  } else if (doc.contains("B")) {
    file.plant = plant_from_plain(doc, origin);
    file.plain = true;
  } else {
    parse_fail(origin, "expected state-space blocks or a \"tf\" entry");
  }
  if (doc.contains("states")) {
    const json& n = doc.at("states");
    if (!n.is_number_integer() || n.get<long long>() != file.plant.states()) {
      parse_fail(origin, "\"states\" disagrees with A (" + std::to_string(file.plant.states()) + ")");
    }
  }
  return file;
}

PlantFile load_plant(const std::string& path) { return parse_plant(read_file(path), path); }

json plant_to_json(const PlantFile& file) {
  const GeneralizedPlant& P = file.plant;
  json j = {{"name", file.name}, {"states", P.states()}, {"A", to_json(P.A())}};
  if (file.plain) {
    j["B"] = to_json(P.B2());
    j["C"] = to_json(P.C2());
    return j;
  }
  j["B1"] = to_json(P.B1());
  j["B2"] = to_json(P.B2());
  j["C1"] = to_json(P.C1());
  j["C2"] = to_json(P.C2());
  j["D11"] = to_json(P.D11());
  j["D12"] = to_json(P.D12());
  j["D21"] = to_json(P.D21());
  return j;
}

// ---- configuration ---------------------------------------------------------

json RunConfig::snapshot() const {
  json j = {{"eps_strict", eps_strict},
            {"eps_relative", eps_relative},
            {"bisect_tol", bisect_tol},
            {"schur_tol", schur_tol},
            {"condition_threshold", condition_threshold},
            {"gamma_lo", gamma_lo},
            {"gamma_hi", gamma_hi},
            {"axis_shift", axis_shift},
            {"sweep_points", sweep_points},
            {"out", out_dir},
            {"seed", seed},
            {"verbose", verbose}};
  json w = json::object();
  if (weights.W1) w["W1"] = state_space_json(*weights.W1);
  if (weights.W2) w["W2"] = state_space_json(*weights.W2);
  j["weights"] = w;
  return j;
}

StrongStabOptions RunConfig::strongstab_options() const {
  StrongStabOptions o;
  o.lmi.eps_strict = eps_strict;
  o.lmi.eps_relative = eps_relative;
  o.riccati.imaginary_axis_tol = schur_tol;
  o.riccati.condition_threshold = condition_threshold;
  o.gamma_lo = gamma_lo;
  o.gamma_hi = gamma_hi;
  return o;
}

HinfOptions RunConfig::hinf_options() const {
  HinfOptions o;
  o.riccati.imaginary_axis_tol = schur_tol;
  o.riccati.condition_threshold = condition_threshold;
  o.gamma_rel_tol = bisect_tol;
  o.inner = strongstab_options();
  return o;
}

void apply_json(RunConfig& c, const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "config: top level must be an object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "eps_strict") c.eps_strict = v.get<double>();
      else if (key == "eps_relative") c.eps_relative = v.get<double>();
      else if (key == "bisect_tol") c.bisect_tol = v.get<double>();
      else if (key == "schur_tol") c.schur_tol = v.get<double>();
      else if (key == "condition_threshold") c.condition_threshold = v.get<double>();
      else if (key == "gamma_lo") c.gamma_lo = v.get<double>();
      else if (key == "gamma_hi") c.gamma_hi = v.get<double>();
      else if (key == "axis_shift") c.axis_shift = v.get<double>();
      else if (key == "sweep_points") c.sweep_points = v.get<int>();
      else if (key == "out") c.out_dir = v.get<std::string>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "verbose") c.verbose = v.get<bool>();
      else if (key == "weights") {
        if (v.contains("W1")) c.weights.W1 = weight_from_json(v.at("W1"), "weights.W1");
        if (v.contains("W2")) c.weights.W2 = weight_from_json(v.at("W2"), "weights.W2");
      } else {
        throw Error(ErrorCode::ParseError, "config: unknown key \"" + key + "\"");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
  }
}

void apply_environment(RunConfig& c) {
  c.eps_strict = env_double("STRONGSTAB_EPS_STRICT", c.eps_strict);
  c.eps_relative = env_double("STRONGSTAB_EPS_RELATIVE", c.eps_relative);
  c.bisect_tol = env_double("STRONGSTAB_BISECT_TOL", c.bisect_tol);
  c.schur_tol = env_double("STRONGSTAB_SCHUR_TOL", c.schur_tol);
  c.condition_threshold = env_double("STRONGSTAB_CONDITION_THRESHOLD", c.condition_threshold);
  c.gamma_lo = env_double("STRONGSTAB_GAMMA_LO", c.gamma_lo);
  c.gamma_hi = env_double("STRONGSTAB_GAMMA_HI", c.gamma_hi);
  c.axis_shift = env_double("STRONGSTAB_AXIS_SHIFT", c.axis_shift);
  c.sweep_points = static_cast<int>(env_double("STRONGSTAB_SWEEP_POINTS", c.sweep_points));
  if (const char* v = std::getenv("STRONGSTAB_OUT"); v && *v) c.out_dir = v;
  if (const char* v = std::getenv("STRONGSTAB_SEED"); v && *v) {
    std::uint64_t seed = 0;
    const auto [end, ec] = std::from_chars(v, v + std::strlen(v), seed);
    if (ec != std::errc() || *end != '\0') {
      throw Error(ErrorCode::ParseError, std::string("STRONGSTAB_SEED: not an unsigned integer: ") + v);
    }
    c.seed = seed;
  }
  if (const char* v = std::getenv("STRONGSTAB_VERBOSE"); v && *v) {
    c.verbose = std::string(v) != "0" && std::string(v) != "false";
  }
}

void validate(const RunConfig& c) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::BadShape, std::string("config: ") + name + " must be positive");
    }
  };
  if (c.eps_strict < 0.0) throw Error(ErrorCode::BadShape, "config: eps_strict must be >= 0");
  positive(c.eps_relative, "eps_relative");
  positive(c.bisect_tol, "bisect_tol");
  positive(c.schur_tol, "schur_tol");
  positive(c.condition_threshold, "condition_threshold");
  positive(c.gamma_lo, "gamma_lo");
  positive(c.gamma_hi, "gamma_hi");
  positive(c.axis_shift, "axis_shift");
  if (c.gamma_lo >= c.gamma_hi) throw Error(ErrorCode::BadShape, "config: gamma_lo >= gamma_hi");
  if (c.sweep_points < 1) throw Error(ErrorCode::BadShape, "config: sweep_points must be >= 1");
}

RunConfig load_config(const std::optional<std::string>& path) {
  RunConfig c;
  if (path) apply_json(c, parse_json(read_file(*path), *path));
  apply_environment(c);
  validate(c);
  return c;
}

// ---- helpers ---------------------------------------------------------------

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Infeasible:
    case ErrorCode::GammaInfeasible:
    case ErrorCode::InnerLmiInfeasible:
    case ErrorCode::BracketInfeasible:
      return kInfeasible;
    default:
      return kError;
  }
}

std::vector<double> parse_grid(const std::string& spec) {
  double lo = 0.0, hi = 0.0;
  int points = 0;
  char tail = 0;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%d%c", &lo, &hi, &points, &tail) != 3 || points < 1 ||
      !(lo <= hi)) {
    throw Error(ErrorCode::ParseError, "grid \"" + spec + "\": expected lo:hi:points");
  }
  return bench::linspace(lo, hi, points);
}

double random_frequency_peak(const StateSpace& S, std::uint64_t seed, int samples) {
  double scale = 1.0;
  if (S.states() > 0) {
    const ComplexVector ev = eigenvalues(S.A);
    scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> exponent(-3.0, 3.0);
  double peak = sigma_max(S.D);
  for (int k = 0; k < samples; ++k) {
    const double omega = scale * std::pow(10.0, exponent(rng));
    peak = std::max(peak, sigma_max(S.evaluate(Complex(0.0, omega))));
  }
  return peak;
}

// ---- commands --------------------------------------------------------------

int cmd_strongstab(const StrongStabArgs& args, const RunConfig& config, std::ostream& out,
                   std::ostream& err) {
  return guarded(err, [&] {
    if (args.stability_only && args.structured) {
      throw Error(ErrorCode::BadShape, "--stability-only and --structured are exclusive");
    }
    const PlantFile file = load_plant(args.plant_path);
    const PlantTriple triple = file.channel();
    const StrongStabOptions options = config.strongstab_options();
    const bool minimize = args.minimize || (!args.gamma_K && !args.stability_only);

    json report = report_header("strongstab", config);
    report["plant"] = file.name;
    const char* variant = args.stability_only ? "stability-only" : args.structured ? "structured" : "full";
    report["variant"] = variant;
    if (args.dump_lmi) {
      const Matrix X = solve_stabilizing_riccati(triple.A, triple.B, options.riccati).X;
      const Lemma1Variant v = args.stability_only ? Lemma1Variant::StabilityOnly
                              : args.structured   ? Lemma1Variant::Structured
                                                  : Lemma1Variant::Full;
      const auto gamma = args.stability_only || minimize ? std::nullopt : args.gamma_K;
      const fs::path dump_path = out_path(config, file.name + "_lmi.txt");
      write_text(dump_path, dump(build_lemma1_lmis(triple.A, triple.B, triple.C, X, gamma, v)));
      report["lmi_dump"] = dump_path.string();
    }

    const fs::path path = out_path(config, file.name + "_strongstab.json");
    StrongStabResult r;
    try {
      if (args.stability_only) {
        r = strong_stabilize_stability_only(triple, options);
      } else if (args.structured) {
        r = structured_baseline(triple, args.gamma_K, minimize, options);
      } else {
        r = strong_stabilize(triple, args.gamma_K, minimize, options);
      }
    } catch (const Error& e) {
      report["status"] = exit_code_for(e.code()) == kInfeasible ? "infeasible" : "error";
      report["error"] = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
      if (exit_code_for(e.code()) == kInfeasible) report["note"] = kSufficiencyNote;
      write_text(path, report.dump(2) + "\n");
      throw;
    }

    report["status"] = "feasible";
    report["result"] = strongstab_result_json(r);
    const StateSpace plant_ss(triple.A, triple.B, triple.C,
                              Matrix::Zero(triple.C.rows(), triple.B.cols()));
    const StateSpace& K = r.controller;
    const StateSpace loop = lft_lower(GeneralizedPlant(plant_ss, 0, plant_ss.inputs(), 0,
                                                       plant_ss.outputs()),
                                      K);
    json recomputed = {{"controller_abscissa", number(K.states() ? spectral_abscissa(K.A) : -std::numeric_limits<double>::infinity())},
                       {"closed_loop_abscissa", number(spectral_abscissa(loop.A))}};
    if (K.states() > 0 && spectral_abscissa(K.A) < 0.0) {
      const double knorm = hinf_norm(K);
      recomputed["controller_hinf_norm"] = knorm;
      recomputed["controller_random_peak"] = random_frequency_peak(K, config.seed);
      recomputed["controller_norm_below_gamma_K"] = knorm < r.gamma_K;
    }
    report["recomputed"] = recomputed;
    write_text(path, report.dump(2) + "\n");

    out << "plant " << file.name << " (n = " << triple.states() << "), variant " << variant << '\n';
    out << "gamma_K = " << format6(r.gamma_K);
    if (std::isfinite(r.gamma_K_infeasible_below)) {
      out << " (infeasible at " << format6(r.gamma_K_infeasible_below) << ")";
    }
    out << '\n';
    out << "controller order " << K.states() << ", abscissa " << format6(r.certificates.controller_abscissa)
        << ", closed-loop abscissa " << format6(r.certificates.closed_loop_abscissa) << '\n';
    out << "||K||inf = " << format6(r.certificates.controller_hinf_norm) << ", LMI margin "
        << format6(r.certificates.lmi_margin) << '\n';
    out << "report " << path.string() << '\n';
    return int{kSuccess};
  });
}

int cmd_stable_hinf(const StableHinfArgs& args, const RunConfig& config, std::ostream& out,
                    std::ostream& err) {
  return guarded(err, [&] {
    if (args.gamma.has_value() == args.min_gamma) {
      throw Error(ErrorCode::BadShape, "exactly one of --gamma or --min-gamma is required");
    }
    const PlantFile file = load_plant(args.plant_path);
    HinfOptions options = config.hinf_options();
    if (args.tol) {
      if (!(*args.tol > 0.0)) throw Error(ErrorCode::BadShape, "--tol must be positive");
      options.gamma_rel_tol = *args.tol;
    }

    json report = report_header("stable-hinf", config);
    report["plant"] = file.name;
    const fs::path path = out_path(config, file.name + "_stable_hinf.json");

    StableHinfController best;
    double gamma_opt = std::numeric_limits<double>::quiet_NaN();
    try {
      gamma_opt = optimal_gamma(file.plant, options);
      report["gamma_opt"] = gamma_opt;
      if (args.gamma) {
        report["mode"] = "fixed";
        best = stable_hinf(file.plant, *args.gamma, options);
      } else {
        report["mode"] = "min-gamma";
        std::optional<double> lo, hi;
        if (args.bracket) {
          lo = args.bracket->first;
          hi = args.bracket->second;
        }
        const MinGammaResult r = min_gamma_stable(file.plant, lo, hi, options);
        report["probes"] = probes_json(r.probes);
        report["non_monotone"] = r.non_monotone;
        if (config.verbose) {
          for (const GammaProbe& p : r.probes) {
            err << "probe gamma = " << format6(p.gamma) << (p.feasible ? " feasible" : " infeasible")
                << (p.reason.empty() ? "" : ": " + p.reason) << '\n';
          }
        }
        best = r.best;
      }
    } catch (const Error& e) {
      report["status"] = exit_code_for(e.code()) == kInfeasible ? "infeasible" : "error";
      report["error"] = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
      write_text(path, report.dump(2) + "\n");
      throw;
    }

    report["status"] = "feasible";
    report["gamma"] = best.gamma;
    report["controller"] = state_space_json(best.controller);
    report["controller_order"] = best.controller.states();
    report["inner_gamma_K"] = number(best.inner.gamma_K);
    report["certificates"] = hinf_certificates_json(best.certificates, best.gamma);
    report["recomputed"] = recompute_closed_loop(file.plant, best.controller, best.gamma, config);
    write_text(path, report.dump(2) + "\n");

    out << "plant " << file.name << " (n = " << file.plant.states() << ")\n";
    out << "gamma_opt = " << format6(gamma_opt) << ", gamma = " << format6(best.gamma) << '\n';
    out << "controller order " << best.controller.states() << ", abscissa "
        << format6(best.certificates.controller_abscissa) << ", closed-loop abscissa "
        << format6(best.certificates.closed_loop_abscissa) << ", closed-loop norm "
        << format6(best.certificates.closed_loop_norm) << '\n';
    out << "report " << path.string() << '\n';
    return int{kSuccess};
  });
}

int cmd_bench(const BenchArgs& args, const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    static const std::vector<std::string> kCases = {"lee-soh",  "benchmark10", "siso-mixed-sensitivity",
                                                    "g1-sweep", "g2-sweep",    "cc-pipeline"};
    const bool all = args.case_name == "all";
    if (!all && std::find(kCases.begin(), kCases.end(), args.case_name) == kCases.end()) {
      throw Error(ErrorCode::BadShape, "unknown bench case \"" + args.case_name + "\"");
    }
    const HinfOptions options = config.hinf_options();
    std::vector<bench::SynthesisReport> reports;
    json summary = report_header("bench", config);
    summary["cases"] = json::array();
    bool failed = false;

    auto run_synthesis = [&](const std::string& name) {
      if (name == "lee-soh") {
        reports.push_back(bench::case_lee_soh(options));
      } else if (name == "benchmark10") {
        const std::vector<double> betas =
            args.betas.empty() ? std::vector<double>{0.1, 0.01, 0.001} : args.betas;
        for (double beta : betas) reports.push_back(bench::case_benchmark10(beta, config.axis_shift, options));
      } else if (name == "siso-mixed-sensitivity") {
        reports.push_back(bench::case_siso_mixed_sensitivity(true, options));
      } else if (name == "cc-pipeline") {
        if (all && (!config.weights.W1 || !config.weights.W2)) {
          out << "cc-pipeline: skipped (no weights configured)\n";
          summary["cases"].push_back({{"name", name}, {"skipped", "no weights configured"}});
          return;
        }
        reports.push_back(bench::case_cc_pipeline(config.weights, options));
      }
    };

    auto run_sweep = [&](const std::string& name) {
      const bench::SweepPlant which = name == "g1-sweep" ? bench::SweepPlant::G1 : bench::SweepPlant::G2;
      const std::vector<double> alphas = args.alpha ? parse_grid(*args.alpha)
                                                    : bench::default_alpha_grid(which, config.sweep_points);
      const auto rows = bench::case_g1_g2_sweep(which, alphas, config.strongstab_options());
      int violations = 0, compared = 0;
      double largest_gap = 0.0;
      for (const auto& r : rows) {
        if (!r.dominance_holds()) ++violations;
        if (std::isfinite(r.gamma_lmi) && std::isfinite(r.gamma_structured)) {
          ++compared;
          largest_gap = std::max(largest_gap, 1.0 - r.gamma_lmi / r.gamma_structured);
        }
      }
      write_text(out_path(config, "bench_" + name + ".csv"), bench::sweep_csv(rows));
      json j = {{"name", name},
                {"rows", sweep_json(rows)},
                {"compared", compared},
                {"dominance_violations", violations},
                {"largest_relative_gap", largest_gap}};
      write_text(out_path(config, "bench_" + name + ".json"), j.dump(2) + "\n");
      summary["cases"].push_back(j);
      if (violations > 0) failed = true;
      out << name << ": " << rows.size() << " points, " << compared << " compared, " << violations
          << " dominance violations, largest gap " << format6(100.0 * largest_gap) << "%\n";
    };

    for (const std::string& name : kCases) {
      if (!all && name != args.case_name) continue;
      if (name == "g1-sweep" || name == "g2-sweep") {
        run_sweep(name);
      } else {
        run_synthesis(name);
      }
    }

    if (!reports.empty()) {
      std::string csv = bench::report_csv_header() + "\n";
      for (const auto& r : reports) {
        csv += bench::report_csv_row(r) + "\n";
        json j = report_json(r);
        summary["cases"].push_back(j);
        if (!r.passed()) failed = true;
        out << r.name;
        for (const auto& [k, v] : r.parameters) out << ' ' << k << '=' << format6(v);
        out << ": gamma_opt " << format6(r.gamma_opt) << ", gamma_min " << format6(r.gamma_min);
        if (!std::isnan(r.gamma_structured)) out << ", structured " << format6(r.gamma_structured);
        out << ", order " << r.controller_order << ", " << format6(r.runtime_seconds) << " s, "
            << (r.passed() ? "PASS" : "FAIL") << '\n';
        for (const auto& e : r.expectations) {
          if (e.pass()) continue;
          out << "  " << e.name << " = " << format6(e.actual) << ", expected "
              << (e.sense == bench::Expectation::Sense::AtMost ? "<= " : "") << format6(e.expected)
              << (e.sense == bench::Expectation::Sense::AtMost ? " + " : " +/- ")
              << format6(e.tolerance) << '\n';
        }
      }
      const std::string stem = all ? "bench_all" : "bench_" + args.case_name;
      write_text(out_path(config, stem + ".csv"), csv);
    }
    summary["passed"] = !failed;
    write_text(out_path(config, all ? "bench_summary.json" : "bench_" + args.case_name + "_summary.json"),
               summary.dump(2) + "\n");
    if (failed) err << "bench: one or more expectations failed\n";
    return failed ? int{kError} : int{kSuccess};
  });
}

int cmd_analyze(const AnalyzeArgs& args, const RunConfig& config, std::ostream& out,
                std::ostream& err) {
  return guarded(err, [&] {
    const PlantFile file = load_plant(args.plant_path);
    const GeneralizedPlant& P = file.plant;
    const bool everything = !(args.pip || args.norm || args.zeros || args.assumptions);
    const StateSpace channel(P.A(), P.B2(), P.C2(), Matrix::Zero(P.p2(), P.m2()));

    json report = report_header("analyze", config);
    report["plant"] = file.name;
    report["states"] = P.states();
    out << "plant " << file.name << " (n = " << P.states() << ")\n";

    if (everything || args.pip) {
      const PipReport pip = check_pip(channel);
      report["pip"] = {{"satisfied", pip.satisfied},
                       {"real_nonneg_zeros", pip.real_nonneg_zeros},
                       {"real_nonneg_poles", pip.real_nonneg_poles}};
      if (pip.violating_pair) {
        report["pip"]["violating_pair"] = {number(pip.violating_pair->first),
                                           number(pip.violating_pair->second)};
      }
      out << "PIP " << (pip.satisfied ? "satisfied" : "violated") << '\n';
    }
    if (everything || args.zeros) {
      const ComplexVector z = transmission_zeros(channel);
      json zeros = json::array();
      out << "transmission zeros:";
      for (Index i = 0; i < z.size(); ++i) {
        zeros.push_back({z(i).real(), z(i).imag()});
        out << ' ' << format6(z(i).real());
        if (z(i).imag() != 0.0) out << (z(i).imag() > 0 ? "+" : "") << format6(z(i).imag()) << 'j';
      }
      out << (z.size() == 0 ? " none" : "") << '\n';
      report["zeros"] = zeros;
    }
    if (everything || args.norm) {
      const double abscissa = spectral_abscissa(P.A());
      report["spectral_abscissa"] = abscissa;
      if (abscissa < 0.0) {
        const double norm = hinf_norm(P.ss());
        report["hinf_norm"] = norm;
        report["random_peak"] = random_frequency_peak(P.ss(), config.seed);
        out << "||P||inf = " << format6(norm) << '\n';
      } else {
        report["hinf_norm"] = "inf";
        out << "||P||inf = inf (spectral abscissa " << format6(abscissa) << ")\n";
      }
    }
    if ((everything && P.m1() > 0 && P.p1() > 0) || args.assumptions) {
      json violations = json::array();
      for (const AssumptionViolation& v : validate_assumptions(P)) {
        violations.push_back({{"assumption", to_string(v.which)}, {"detail", v.detail}});
        out << "assumption " << to_string(v.which) << " violated: " << v.detail << '\n';
      }
      if (violations.empty()) out << "assumptions A1-A4 hold\n";
      report["assumption_violations"] = violations;
    }
    const fs::path path = out_path(config, file.name + "_analyze.json");
    write_text(path, report.dump(2) + "\n");
    out << "report " << path.string() << '\n';
    return int{kSuccess};
  });
}

}  // namespace strongstab::cli
