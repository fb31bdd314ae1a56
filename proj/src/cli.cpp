#include "bellforge/cli.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bellforge/akmeas.hpp"
#include "bellforge/causal.hpp"
#include "bellforge/csv.hpp"
#include "bellforge/errors.hpp"
#include "bellforge/lhv.hpp"
#include "bellforge/psbell.hpp"
#include "bellforge/spinor.hpp"
#include "bellforge/waves.hpp"
#include "bellforge/wigner.hpp"

namespace bellforge::cli {

namespace {

using json = nlohmann::ordered_json;
using waves::Axis;
using waves::Complex;
using waves::GridWavefunction;

constexpr double kPi = std::numbers::pi;

json header(const std::string& command) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  return j;
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

Complex complex_from(const json& v, const std::string& what) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  throw InputError(what + ": expected a number or a [re, im] pair");
}

json read_json(const std::string& path, std::istream& in) {
  try {
    if (path == "-") return json::parse(in);
    std::ifstream f(path);
    if (!f) throw InputError("cannot open '" + path + "'");
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw InputError("'" + path + "' is not valid JSON: " + e.what());
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write '" + path + "'");
  return f;
}

// JSON goes to stdout and tables to --out. With --format csv the JSON is
// suppressed and a table without an --out path goes to stdout instead.
class Sink {
 public:
  Sink(bool csv, std::ostream& out) : csv_(csv), out_(out) {}

  template <class Fill>
  void table(const std::string& path, json& j, Fill fill) {
    if (!path.empty()) {
      auto f = open_out(path);
      csv::Writer w(f);
      fill(w);
      j["csv"] = path;
    } else if (csv_) {
      csv::Writer w(out_);
      fill(w);
    }
  }

  bool csv() const { return csv_; }

  int finish(const json& j, int code) {
    if (!csv_) out_ << j.dump(2) << '\n';
    return code;
  }

 private:
  bool csv_;
  std::ostream& out_;
};

const json& field(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw InputError(where + ": missing \"" + key + "\"");
  return j.at(key);
}

// ---------------------------------------------------------------- spinor

spinor::StateVector4 named_state(const std::string& name, std::istream& in) {
  if (name == "psi-plus") return spinor::StateVector4::psi_plus();
  if (name == "psi-minus") return spinor::StateVector4::psi_minus();
  if (name == "singlet") return spinor::StateVector4::singlet();
  const json j = read_json(name, in);
  const json& a = field(j, "amplitudes", "state file");
  if (!a.is_array() || a.size() != 4) throw InputError("state file: \"amplitudes\" needs four entries");
  std::array<Complex, 4> amps;
  for (std::size_t k = 0; k < 4; ++k) amps[k] = complex_from(a[k], "state amplitude");
  return spinor::StateVector4(amps);
}

json state_json(const spinor::StateVector4& s) {
  json a = json::array();
  for (const auto& z : s.amplitudes()) a.push_back(complex_json(z));
  return json{{"amplitudes", a}};
}

json setting_json(const spinor::AnalyzerSetting& s) {
  return json{{"theta", s.theta()}, {"kind", std::string(1, spinor::kind_letter(s.kind()))}};
}

spinor::AnalyzerSetting setting_from(const json& j, const std::string& name) {
  const json& s = field(j, name, "settings");
  const json& k = field(s, "kind", "setting " + name);
  const json& t = field(s, "theta", "setting " + name);
  if (!k.is_string() || k.get<std::string>().size() != 1 || !t.is_number())
    throw InputError("setting " + name + ": expected {\"theta\": number, \"kind\": \"L\"|\"E\"}");
  return {t.get<double>(), spinor::kind_from_letter(k.get<std::string>()[0])};
}

json settings_json(const spinor::ChshSettings& s) {
  return json{{"a", setting_json(s.a)},
              {"b", setting_json(s.b)},
              {"a_prime", setting_json(s.a_prime)},
              {"b_prime", setting_json(s.b_prime)}};
}

spinor::ChshSettings settings_from(const json& j) {
  return {setting_from(j, "a"), setting_from(j, "a_prime"), setting_from(j, "b"), setting_from(j, "b_prime")};
}

struct ChshArgs {
  std::string state = "psi-plus";
  std::string kinds = "EEEE";
  std::vector<double> angles;
  bool degrees = false;
  bool optimize = false;
  std::uint64_t seed = 1;
};

int run_chsh(const ChshArgs& a, std::istream& in, Sink& sink) {
  const auto state = named_state(a.state, in);
  const auto kinds = spinor::kinds_from_string(a.kinds);
  spinor::ChshSettings s;
  if (a.optimize) {
    if (!a.angles.empty()) throw InputError("chsh: --angles and --optimize are exclusive");
    s = spinor::maximize_chsh(state, kinds, a.seed).settings;
  } else {
    if (a.angles.size() != 4) throw InputError("chsh: --angles needs four values a,b,a',b' (or use --optimize)");
    const double f = a.degrees ? kPi / 180.0 : 1.0;
    s = {spinor::AnalyzerSetting(a.angles[0] * f, kinds[0]), spinor::AnalyzerSetting(a.angles[2] * f, kinds[2]),
         spinor::AnalyzerSetting(a.angles[1] * f, kinds[1]), spinor::AnalyzerSetting(a.angles[3] * f, kinds[3])};
  }
  const auto c = spinor::chsh_correlations(state, s);
  json j = header("chsh");
  j["state"] = state_json(state);
  j["kinds"] = a.kinds;
  j["optimized"] = a.optimize;
  if (a.optimize) j["seed"] = a.seed;
  j["settings"] = settings_json(s);
  j["correlations"] = {{"ab", c.ab}, {"ab'", c.ab_prime}, {"a'b", c.a_prime_b}, {"a'b'", c.a_prime_b_prime}};
  j["S"] = c.chsh();
  sink.table({}, j, [&](csv::Writer& w) {
    w.header({"ab", "ab'", "a'b", "a'b'", "S"});
    w.row(std::vector<double>{c.ab, c.ab_prime, c.a_prime_b, c.a_prime_b_prime, c.chsh()});
  });
  return sink.finish(j, kExitOk);
}

// ---------------------------------------------------------------- lhv

const char* kPairs[2][2] = {{"11", "12"}, {"21", "22"}};

json behavior_json(const lhv::Behavior& b) {
  json p;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      p[kPairs[i][j]] = {{b.p[i][j][0][0], b.p[i][j][0][1]}, {b.p[i][j][1][0], b.p[i][j][1][1]}};
  return p;
}

lhv::Behavior behavior_from(const json& j) {
  const json& p = field(j, "p", "behavior file");
  lhv::Behavior b;
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k) {
      const json& m = field(p, kPairs[i][k], "behavior \"p\"");
      if (!m.is_array() || m.size() != 2 || !m[0].is_array() || !m[1].is_array() || m[0].size() != 2 ||
          m[1].size() != 2)
        throw InputError(std::string("behavior \"p\".\"") + kPairs[i][k] + "\": expected a 2x2 array");
      for (int r = 0; r < 2; ++r)
        for (int s = 0; s < 2; ++s) {
          if (!m[r][s].is_number())
            throw InputError(std::string("behavior \"p\".\"") + kPairs[i][k] + "\": entries must be numbers");
          b.p[i][k][r][s] = m[r][s].get<double>();
        }
    }
  return b;
}

struct LhvArgs {
  std::string behavior;
  std::string from_state;
};

int run_lhv(const LhvArgs& a, std::istream& in, Sink& sink) {
  if (a.behavior.empty() == a.from_state.empty())
    throw InputError("lhv: give exactly one of --behavior or --from-state");
  lhv::Behavior b;
  if (!a.behavior.empty()) {
    b = behavior_from(read_json(a.behavior, in));
  } else {
    const json j = read_json(a.from_state, in);
    const json& st = field(j, "state", "chsh output");
    const json& amps = field(st, "amplitudes", "chsh output \"state\"");
    if (!amps.is_array() || amps.size() != 4) throw InputError("chsh output: \"amplitudes\" needs four entries");
    std::array<Complex, 4> z;
    for (std::size_t k = 0; k < 4; ++k) z[k] = complex_from(amps[k], "state amplitude");
    // The amplitudes went through a decimal round trip; renormalize.
    b = lhv::quantum_behavior(spinor::StateVector4::normalized(z), settings_from(field(j, "settings", "chsh output")));
  }
  const auto v = lhv::lhv_feasible(b);
  json j = header("lhv");
  j["verdict"] = v.feasible ? "feasible" : "infeasible";
  j["residual"] = v.residual;
  j["behavior"] = json{{"p", behavior_json(b)}};
  json variants = json::array();
  for (const auto& c : lhv::chsh_variants(b))
    variants.push_back({{"coefficients", c.coefficients}, {"value", c.value}});
  j["chsh_variants"] = variants;
  if (v.joint) {
    json q = json::array();
    for (int r = 0; r < 2; ++r)
      for (int rp = 0; rp < 2; ++rp)
        for (int s = 0; s < 2; ++s)
          for (int sp = 0; sp < 2; ++sp) {
            auto sign = [](int o) { return o == 0 ? 1 : -1; };
            q.push_back({{"r", sign(r)},
                         {"r'", sign(rp)},
                         {"s", sign(s)},
                         {"s'", sign(sp)},
                         {"q", v.joint->q[lhv::JointDistribution::index(r, rp, s, sp)]}});
          }
    j["joint"] = q;
  }
  if (v.certificate) {
    j["certificate"] = {{"coefficients", v.certificate->coefficients},
                        {"value", v.certificate->value},
                        {"inequality", lhv::describe(*v.certificate)}};
  }
  sink.table({}, j, [&](csv::Writer& w) {
    w.header({"verdict", "residual", "certificate_value"});
    w.row(std::vector<std::string>{v.feasible ? "feasible" : "infeasible", csv::format_number(v.residual),
                                   v.certificate ? csv::format_number(v.certificate->value) : ""});
  });
  return sink.finish(j, kExitOk);
}

// ---------------------------------------------------------------- wavefunctions

struct GridArgs {
  std::size_t grid = 0;
  double xmax = 0.0;  // 0 picks the extent that matches position and momentum ranges
};

Axis make_axis(const GridArgs& g, std::size_t default_n, double default_xmax = 0.0) {
  const std::size_t n = g.grid ? g.grid : default_n;
  double x = g.xmax > 0.0 ? g.xmax : default_xmax;
  if (!(x > 0.0)) x = std::sqrt(kPi * static_cast<double>(n) / 2.0);
  return Axis::centered(n, x);
}

struct PacketArgs {
  double sigma = 1.0;
  double x0 = 0.0;
  double p0 = 0.0;
  double t = 0.0;
  double mass = 1.0;
};

void add_grid(CLI::App* app, GridArgs& g, std::size_t default_n) {
  app->add_option("--grid", g.grid, "Samples per axis, a power of two (default " + std::to_string(default_n) + ")");
  app->add_option("--xmax", g.xmax, "Half extent of the position grid (default sqrt(pi N / 2))");
}

void add_packet(CLI::App* app, PacketArgs& p) {
  app->add_option("--sigma", p.sigma, "Initial position width")->capture_default_str();
  app->add_option("--x0", p.x0, "Initial mean position")->capture_default_str();
  app->add_option("--p0", p.p0, "Mean momentum")->capture_default_str();
  app->add_option("--t", p.t, "Free evolution time")->capture_default_str();
  app->add_option("--mass", p.mass, "Particle mass")->capture_default_str();
}

GridWavefunction file_wavefunction(const std::string& path, std::istream& in, std::size_t dim) {
  const json j = read_json(path, in);
  const json& n = field(j, "n", "wavefunction file");
  const json& x = field(j, "xmax", "wavefunction file");
  const json& v = field(j, "values", "wavefunction file");
  const std::size_t d = j.contains("dim") ? j.at("dim").get<std::size_t>() : 1;
  if (d != dim) throw InputError("wavefunction file: expected dim " + std::to_string(dim));
  if (!n.is_number_unsigned() || !x.is_number()) throw InputError("wavefunction file: bad \"n\" or \"xmax\"");
  const Axis axis = Axis::centered(n.get<std::size_t>(), x.get<double>());
  std::size_t count = axis.n;
  if (dim == 2) count *= axis.n;
  if (!v.is_array() || v.size() != count)
    throw InputError("wavefunction file: \"values\" needs " + std::to_string(count) + " entries");
  std::vector<Complex> values(count);
  for (std::size_t k = 0; k < count; ++k) values[k] = complex_from(v[k], "wavefunction value");
  std::vector<Axis> axes(dim, axis);
  GridWavefunction psi(axes, std::move(values));
  if (!(psi.norm_squared() > 0.0)) throw InputError("wavefunction file: all samples are zero");
  psi.normalize();
  return psi;
}

// "name" or "name:param"
std::pair<std::string, std::optional<double>> split_state(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) return {s, std::nullopt};
  try {
    std::size_t used = 0;
    const double v = std::stod(s.substr(colon + 1), &used);
    if (used != s.size() - colon - 1) throw std::invalid_argument("trailing");
    return {s.substr(0, colon), v};
  } catch (const std::exception&) {
    throw InputError("cannot read the parameter in '" + s + "'");
  }
}

GridWavefunction one_d_state(const std::string& spec, const Axis& axis, const PacketArgs& p, std::istream& in) {
  const auto [name, param] = split_state(spec);
  if (name == "gaussian") return waves::gaussian_packet({p.x0, p.p0, p.sigma, p.t, p.mass}, axis);
  if (name == "two-gaussian") return waves::two_gaussian(axis);
  if (name == "excited") return waves::oscillator_state(1, axis);
  if (name == "oscillator") {
    const double level = param.value_or(0.0);
    if (level < 0.0 || level != std::floor(level)) throw InputError("oscillator:n needs a nonnegative integer");
    return waves::oscillator_state(static_cast<int>(level), axis);
  }
  if (!param && spec.ends_with(".json")) return file_wavefunction(spec, in, 1);
  throw InputError("unknown 1-D state '" + spec + "'");
}

const waves::Gaussian2d kDefaultGaussian2d{1.0, 0.6, 0.8, 0.3, -0.2, 0.25, 0.4, -0.3, 0.5, -0.4};

waves::Gaussian2d gaussian2d_from(const std::vector<double>& v) {
  if (v.empty()) return kDefaultGaussian2d;
  if (v.size() != 10) throw InputError("--gauss needs ten values a11,a12,a22,b11,b12,b22,c1,c2,p1,p2");
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9]};
}

GridWavefunction two_d_state(const std::string& spec, const Axis& axis, const std::vector<double>& gauss,
                             std::istream& in) {
  const auto [name, param] = split_state(spec);
  if (name == "gaussian") return waves::gaussian_2d(gaussian2d_from(gauss), axis, axis);
  if (name == "product") {
    const auto g = waves::gaussian_packet({0.0, 0.0, 1.0 / std::numbers::sqrt2, 0.0, 1.0}, axis);
    return waves::product(g, g);
  }
  if (name == "psi-plus" || name == "psi-minus") {
    if (!param) throw InputError(name + " needs a cutoff, e.g. " + name + ":10");
    return waves::psi_marginal_state(name == "psi-plus" ? waves::MarginalSign::Plus : waves::MarginalSign::Minus,
                                     *param, axis, axis);
  }
  if (!param && spec.ends_with(".json")) return file_wavefunction(spec, in, 2);
  throw InputError("unknown 2-D state '" + spec + "'");
}

bool is_two_d(const std::string& spec) {
  const auto name = split_state(spec).first;
  return name == "psi-plus" || name == "psi-minus" || name == "product" || name == "gaussian2d";
}

json report_json(const causal::MarginalReport& r) {
  json e = json::array();
  for (const auto& m : r.entries)
    e.push_back({{"ccs", m.ccs}, {"l1", m.l1}, {"in_chain", m.in_chain}, {"pass", m.pass}});
  return json{{"tolerance", r.tolerance}, {"pass", r.pass}, {"marginals", e}};
}

json axis_json(const Axis& a) { return json{{"n", a.n}, {"xmax", a.half_extent()}, {"spacing", a.spacing}}; }

// ---------------------------------------------------------------- rs1d / rs2d

struct RsArgs {
  std::string psi = "gaussian";
  GridArgs grid;
  PacketArgs packet;
  std::vector<double> gauss;
  int epsilon = 1;
  int epsilon2 = 1;
  std::string ordering = "px";
  std::uint64_t mc_samples = 0;
  std::uint64_t seed = 1;
  std::vector<std::string> extra_ccs;
  bool swap_check = false;
  std::string out;
};

causal::VerifyOptions verify_options(const RsArgs& a) {
  causal::VerifyOptions o;
  o.monte_carlo = a.mc_samples > 0;
  if (o.monte_carlo) o.samples = a.mc_samples;
  o.seed = a.seed;
  o.extra_ccs = a.extra_ccs;
  return o;
}

int run_rs1d(const RsArgs& a, std::istream& in, Sink& sink) {
  const Axis axis = make_axis(a.grid, 4096);
  const auto psi = one_d_state(a.psi, axis, a.packet, in);
  const auto map = causal::rs_map_1d(psi, a.epsilon);
  const auto rep = causal::verify_marginals(map, psi, verify_options(a));
  json j = header("rs1d");
  j["psi"] = a.psi;
  j["epsilon"] = a.epsilon;
  j["grid"] = axis_json(axis);
  j["monotone"] = map.is_monotone();
  j["method"] = a.mc_samples > 0 ? "monte-carlo" : "deterministic";
  j.update(report_json(rep));
  sink.table(a.out, j, [&](csv::Writer& w) {
    w.header({"x", "p_hat"});
    const auto img = map.image();
    for (std::size_t i = 0; i < axis.n; ++i) w.row(std::vector<double>{axis.coordinate(i), img[i]});
  });
  return sink.finish(j, rep.pass ? kExitOk : kExitNumerical);
}

causal::ChainOrdering ordering_from(const std::string& s) {
  if (s == "px") return causal::ChainOrdering::MomentumFirst;
  if (s == "xp") return causal::ChainOrdering::PositionFirst;
  throw InputError("--ordering must be px or xp");
}

int run_rs2d(const RsArgs& a, std::istream& in, Sink& sink) {
  const Axis axis = make_axis(a.grid, 1024);
  const auto psi = two_d_state(a.psi, axis, a.gauss, in);
  const auto ordering = ordering_from(a.ordering);
  const auto map = causal::rs_map_2d(psi, a.epsilon, a.epsilon2, ordering);
  const auto rep = causal::verify_marginals(map, psi, verify_options(a));
  json j = header("rs2d");
  j["psi"] = a.psi;
  j["epsilon"] = a.epsilon;
  j["epsilon2"] = a.epsilon2;
  j["ordering"] = causal::ordering_name(ordering);
  j["grid"] = axis_json(axis);
  j["method"] = a.mc_samples > 0 ? "monte-carlo" : "deterministic";
  j.update(report_json(rep));
  bool pass = rep.pass;
  if (a.swap_check) {
    const auto other = ordering == causal::ChainOrdering::MomentumFirst ? causal::ChainOrdering::PositionFirst
                                                                        : causal::ChainOrdering::MomentumFirst;
    const auto swapped = causal::rs_map_2d(psi, a.epsilon, a.epsilon2, other);
    const auto srep = causal::verify_marginals(swapped, psi, verify_options(a));
    j["swap"] = {{"ordering", causal::ordering_name(other)},
                 {"map_difference", causal::image_difference(map, swapped, psi)},
                 {"report", report_json(srep)}};
    pass = pass && srep.pass;
  }
  sink.table(a.out, j, [&](csv::Writer& w) {
    w.header({"x1", "x2", "p1", "p2"});
    const auto table = map.image_table();
    for (std::size_t i = 0; i < axis.n; ++i)
      for (std::size_t k = 0; k < axis.n; ++k) {
        const std::size_t at = 2 * (i * axis.n + k);
        w.row(std::vector<double>{axis.coordinate(i), axis.coordinate(k), table[at], table[at + 1]});
      }
  });
  return sink.finish(j, pass ? kExitOk : kExitNumerical);
}

// ---------------------------------------------------------------- marginal-theorem

struct MarginalTheoremArgs {
  std::vector<double> L{10.0, 100.0, 1000.0, 10000.0};
  std::size_t grid = std::size_t{1} << 22;
  double pad = 32.0;
  std::string sign = "+";
  std::string out;
};

int run_marginal_theorem(const MarginalTheoremArgs& a, Sink& sink) {
  const bool plus = a.sign == "+" || a.sign == "plus";
  if (!plus && a.sign != "-" && a.sign != "minus") throw InputError("--sign must be + or -");
  const auto rep = psbell::marginal_theorem_demo(a.L, {a.grid, a.pad});
  json j = header("marginal-theorem");
  j["sign"] = plus ? "+" : "-";
  j["grid"] = a.grid;
  json rows = json::array();
  for (const auto& r : rep.rows)
    rows.push_back({{"L", r.L}, {"S_plus", r.s_plus}, {"S_minus", r.s_minus}, {"norm_deficit", r.norm_deficit}});
  j["rows"] = rows;
  j["monotone"] = rep.monotone;
  j["exceeds_2_at"] = rep.exceeds_2_at ? json(*rep.exceeds_2_at) : json(nullptr);
  j["extrapolated_limit"] = rep.extrapolated_limit ? json(*rep.extrapolated_limit) : json(nullptr);
  j["fit_degree"] = rep.fit_degree;
  j["tsirelson"] = 2.0 * std::numbers::sqrt2;
  sink.table(a.out, j, [&](csv::Writer& w) {
    w.header({"L", "S"});
    for (const auto& r : rep.rows) w.row(std::vector<double>{r.L, plus ? r.s_plus : r.s_minus});
  });
  return sink.finish(j, kExitOk);
}

// ---------------------------------------------------------------- wigner / parity-chsh

struct WignerArgs {
  std::string state = "gaussian";
  GridArgs grid;
  PacketArgs packet;
  std::string out;
};

int run_wigner(const WignerArgs& a, std::istream& in, Sink& sink) {
  const bool two = is_two_d(a.state);
  GridWavefunction psi = [&] {
    if (!two) return one_d_state(a.state, make_axis(a.grid, 256, 16.0), a.packet, in);
    const auto param = split_state(a.state).second;
    const double extent = param ? 2.0 * *param : 0.0;
    return two_d_state(a.state, make_axis(a.grid, 32, extent), {}, in);
  }();
  const auto w = wigner::wigner_transform(psi);
  const auto h = wigner::hudson_check(psi, w);
  json j = header("wigner");
  j["state"] = a.state;
  j["dim"] = psi.dim();
  j["grid"] = axis_json(psi.axis(0));
  j["min_W"] = w.min();
  j["total"] = w.total();
  if (!two) j["W_origin"] = w.at(psi.axis(0).n / 2, w.p_axes[0].n / 2);
  json errs = json::array();
  for (const auto& e : wigner::marginal_errors(w, psi)) errs.push_back({{"ccs", e.ccs}, {"max_error", e.max_error}});
  j["marginal_errors"] = errs;
  j["hudson"] = {{"min_W", h.min_w}, {"gaussian_fit_residual", h.gaussian_fit_residual}, {"is_gaussian", h.is_gaussian}};
  sink.table(a.out, j, [&](csv::Writer& wr) {
    if (!two) {
      wr.header({"q", "p", "W"});
      for (std::size_t q = 0; q < w.q_axes[0].n; ++q)
        for (std::size_t p = 0; p < w.p_axes[0].n; ++p)
          wr.row(std::vector<double>{w.q_axes[0].coordinate(q), w.p_axes[0].coordinate(p), w.at(q, p)});
    } else {
      wr.header({"q1", "q2", "p1", "p2", "W"});
      const std::size_t n0 = w.q_axes[0].n, n1 = w.q_axes[1].n, m0 = w.p_axes[0].n, m1 = w.p_axes[1].n;
      std::size_t k = 0;
      for (std::size_t i = 0; i < n0; ++i)
        for (std::size_t l = 0; l < n1; ++l)
          for (std::size_t p = 0; p < m0; ++p)
            for (std::size_t r = 0; r < m1; ++r)
              wr.row(std::vector<double>{w.q_axes[0].coordinate(i), w.q_axes[1].coordinate(l),
                                         w.p_axes[0].coordinate(p), w.p_axes[1].coordinate(r), w.values[k++]});
    }
  });
  return sink.finish(j, kExitOk);
}

struct ParityArgs {
  double r = 0.0;
  bool optimize = false;
  std::uint64_t seed = 1;
  std::string family = "anchored";
  std::vector<std::string> alphas;
};

Complex parse_displacement(const std::string& s) {
  const auto colon = s.find(':');
  try {
    std::size_t used = 0;
    if (colon == std::string::npos) {
      const double re = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument("trailing");
      return {re, 0.0};
    }
    const double re = std::stod(s.substr(0, colon), &used);
    if (used != colon) throw std::invalid_argument("trailing");
    const std::string tail = s.substr(colon + 1);
    const double im = std::stod(tail, &used);
    if (used != tail.size()) throw std::invalid_argument("trailing");
    return {re, im};
  } catch (const std::exception&) {
    throw InputError("cannot read displacement '" + s + "' (expected re or re:im)");
  }
}

int run_parity(const ParityArgs& a, Sink& sink) {
  if (a.r < 0.0) throw InputError("--r must be nonnegative");
  const wigner::TmsvParams params{a.r};
  json j = header("parity-chsh");
  j["r"] = a.r;
  wigner::ParitySettings s{};
  if (a.alphas.empty() || a.optimize) {
    if (!a.alphas.empty()) throw InputError("parity-chsh: --alphas and --optimize are exclusive");
    wigner::ParityFamily fam;
    if (a.family == "anchored")
      fam = wigner::ParityFamily::OriginAnchored;
    else if (a.family == "general")
      fam = wigner::ParityFamily::General;
    else
      throw InputError("--family must be anchored or general");
    const auto opt = wigner::maximize_chsh_parity(params, a.seed, fam);
    s = opt.settings;
    j["family"] = a.family;
    j["seed"] = a.seed;
    j["real_S"] = opt.real_value;
  } else {
    if (a.alphas.size() != 4) throw InputError("--alphas needs four displacements alpha,alpha',beta,beta'");
    s = {parse_displacement(a.alphas[0]), parse_displacement(a.alphas[1]), parse_displacement(a.alphas[2]),
         parse_displacement(a.alphas[3])};
  }
  j["settings"] = {{"alpha", complex_json(s.alpha)},
                   {"alpha_prime", complex_json(s.alpha_prime)},
                   {"beta", complex_json(s.beta)},
                   {"beta_prime", complex_json(s.beta_prime)}};
  const std::vector<double> row{wigner::parity_correlation(params, s.alpha, s.beta),
                                wigner::parity_correlation(params, s.alpha, s.beta_prime),
                                wigner::parity_correlation(params, s.alpha_prime, s.beta),
                                wigner::parity_correlation(params, s.alpha_prime, s.beta_prime),
                                wigner::chsh_parity(params, s)};
  j["correlations"] = {{"ab", row[0]}, {"ab'", row[1]}, {"a'b", row[2]}, {"a'b'", row[3]}};
  j["S"] = row[4];
  sink.table({}, j, [&](csv::Writer& w) {
    w.header({"ab", "ab'", "a'b", "a'b'", "S"});
    w.row(row);
  });
  return sink.finish(j, kExitOk);
}

// ---------------------------------------------------------------- ak-compare

struct AkArgs {
  PacketArgs packet{1.0, 0.0, 0.0, 1.0, 1.0};
  double b = 1.0;
  int epsilon = 1;
  GridArgs grid;
  std::string out;
};

json fit_json(const akmeas::LineFit& f) {
  return json{{"slope", f.slope}, {"intercept", f.intercept}, {"max_residual", f.max_residual}};
}

int run_ak(const AkArgs& a, Sink& sink) {
  const Axis axis = make_axis(a.grid, 2048);
  const auto& p = a.packet;
  const auto psi = waves::gaussian_packet({p.x0, p.p0, p.sigma, p.t, p.mass}, axis);
  const auto v = akmeas::ak_variances(psi, {a.b});
  const auto table = akmeas::momentum_peaks(psi, {a.b}, a.epsilon);
  json j = header("ak-compare");
  j["sigma"] = p.sigma;
  j["t"] = p.t;
  j["mass"] = p.mass;
  j["b"] = a.b;
  j["epsilon"] = a.epsilon;
  j["grid"] = axis_json(axis);
  j["var_x1"] = v.var_x1;
  j["var_x2"] = v.var_x2;
  j["var_q"] = v.var_q;
  j["var_p"] = v.var_p;
  j["variance_residuals"] = {{"x1", v.residual_x1}, {"x2", v.residual_x2}};
  j["ak_fit"] = fit_json(table.ak_fit);
  j["rs_fit"] = fit_json(table.rs_fit);
  j["rows"] = table.rows.size();
  std::size_t flagged = 0;
  for (const auto& r : table.rows) flagged += r.flagged ? 1 : 0;
  j["flagged_rows"] = flagged;
  j["warnings"] = table.warnings;
  sink.table(a.out, j, [&](csv::Writer& w) {
    w.header({"q", "p_ak", "p_rs"});
    for (const auto& r : table.rows) {
      if (r.flagged)
        w.row(std::vector<std::string>{csv::format_number(r.q), "", csv::format_number(r.p_rs)});
      else
        w.row(std::vector<double>{r.q, r.p_ak, r.p_rs});
    }
  });
  return sink.finish(j, kExitOk);
}

// ---------------------------------------------------------------- waves dump

struct DumpArgs {
  std::string state = "gaussian";
  std::string rep;
  GridArgs grid;
  PacketArgs packet;
  std::vector<double> gauss;
  std::string out;
};

int run_dump(const DumpArgs& a, std::istream& in, Sink& sink) {
  if (a.out.empty() && !sink.csv()) throw InputError("waves dump: give --out or --format csv");
  json j = header("waves dump");
  j["state"] = a.state;
  std::size_t rows = 0;
  if (!is_two_d(a.state)) {
    const auto psi = one_d_state(a.state, make_axis(a.grid, 1024), a.packet, in);
    const std::string rep = a.rep.empty() ? "x" : a.rep;
    if (rep != "x" && rep != "p") throw InputError("--rep for a 1-D state is x or p");
    const auto d = waves::density(rep == "x" ? psi : waves::fourier(psi, 0));
    sink.table(a.out, j, [&](csv::Writer& w) {
      w.header({rep, "density"});
      for (std::size_t i = 0; i < d.axes[0].n; ++i, ++rows)
        w.row(std::vector<double>{d.axes[0].coordinate(i), d.at(i)});
    });
    j["rep"] = rep;
    j["grid"] = axis_json(psi.axis(0));
    j["total"] = d.total();
  } else {
    const auto [name, param] = split_state(a.state);
    const auto axis = make_axis(a.grid, 128, param ? 2.0 * *param : 0.0);
    const auto psi = two_d_state(name == "gaussian2d" ? "gaussian" : a.state, axis, a.gauss, in);
    const std::string rep = a.rep.empty() ? "qq" : a.rep;
    if (rep != "qq" && rep != "qp" && rep != "pq" && rep != "pp")
      throw InputError("--rep for a 2-D state is qq, qp, pq or pp");
    GridWavefunction t = psi;
    if (rep[0] == 'p') t = waves::fourier(t, 0);
    if (rep[1] == 'p') t = waves::fourier(t, 1);
    const auto d = waves::density(t);
    sink.table(a.out, j, [&](csv::Writer& w) {
      w.header({std::string(1, rep[0]) + "1", std::string(1, rep[1]) + "2", "density"});
      for (std::size_t i = 0; i < d.axes[0].n; ++i)
        for (std::size_t k = 0; k < d.axes[1].n; ++k, ++rows)
          w.row(std::vector<double>{d.axes[0].coordinate(i), d.axes[1].coordinate(k), d.at(i, k)});
    });
    j["rep"] = rep;
    j["grid"] = axis_json(psi.axis(0));
    j["total"] = d.total();
  }
  j["rows"] = rows;
  return sink.finish(j, kExitOk);
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bell inequality and phase-space toolkit", "bellforge"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string format = "json";
  app.add_option("--format", format, "json, or csv to write the table to stdout")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();

  ChshArgs chsh;
  auto* c = app.add_subcommand("chsh", "CHSH value of a two-photon state");
  c->add_option("--state", chsh.state, "psi-plus, psi-minus, singlet or a JSON file")->capture_default_str();
  c->add_option("--kinds", chsh.kinds, "Analyzer kinds for a, b, a', b' (L or E each)")->capture_default_str();
  c->add_option("--angles", chsh.angles, "a,b,a',b'")->delimiter(',');
  c->add_flag("--degrees", chsh.degrees, "Angles are in degrees");
  c->add_flag("--optimize", chsh.optimize, "Search the settings");
  c->add_option("--seed", chsh.seed, "Seed for the search")->capture_default_str();

  LhvArgs lhv_args;
  auto* l = app.add_subcommand("lhv", "Local hidden variable feasibility of a behavior");
  l->add_option("--behavior", lhv_args.behavior, "Behavior JSON file (- for stdin)");
  l->add_option("--from-state", lhv_args.from_state, "Output of `chsh` (- for stdin)");

  RsArgs rs1;
  auto* r1 = app.add_subcommand("rs1d", "One-dimensional Roy-Singh map and marginal check");
  r1->add_option("--psi", rs1.psi, "gaussian, two-gaussian, excited, oscillator:n or a JSON file")->capture_default_str();
  add_grid(r1, rs1.grid, 4096);
  add_packet(r1, rs1.packet);
  r1->add_option("--epsilon", rs1.epsilon, "+1 or -1")->capture_default_str();
  r1->add_option("--mc-samples", rs1.mc_samples, "Monte Carlo samples (0 for the deterministic check)");
  r1->add_option("--seed", rs1.seed, "Monte Carlo seed")->capture_default_str();
  r1->add_option("--out", rs1.out, "CSV of x, p_hat");

  RsArgs rs2;
  auto* r2 = app.add_subcommand("rs2d", "Two-dimensional chained Roy-Singh map and marginal check");
  r2->add_option("--psi", rs2.psi, "gaussian, product, psi-plus:L, psi-minus:L or a JSON file")->capture_default_str();
  add_grid(r2, rs2.grid, 1024);
  r2->add_option("--gauss", rs2.gauss, "a11,a12,a22,b11,b12,b22,c1,c2,p1,p2 of the 2-D Gaussian")->delimiter(',');
  r2->add_option("--epsilon", rs2.epsilon, "+1 or -1 for the first stage")->capture_default_str();
  r2->add_option("--epsilon2", rs2.epsilon2, "+1 or -1 for the second stage")->capture_default_str();
  r2->add_option("--ordering", rs2.ordering, "px: (X1X2)(P1X2)(P1P2), xp: (X1X2)(X1P2)(P1P2)")->capture_default_str();
  r2->add_option("--mc-samples", rs2.mc_samples, "Monte Carlo samples (0 for the deterministic check)");
  r2->add_option("--seed", rs2.seed, "Monte Carlo seed")->capture_default_str();
  r2->add_option("--extra-ccs", rs2.extra_ccs, "Also report x1p2 or p1x2")->delimiter(',');
  r2->add_flag("--swap-check", rs2.swap_check, "Also build the other ordering and compare the maps");
  r2->add_option("--out", rs2.out, "CSV of x1, x2, p1, p2");

  MarginalTheoremArgs mt;
  auto* m = app.add_subcommand("marginal-theorem", "S(psi+-, L) sweep over cutoffs");
  m->add_option("--L", mt.L, "Cutoffs")->delimiter(',');
  m->add_option("--grid", mt.grid, "Samples per axis (power of two)")->capture_default_str();
  m->add_option("--pad", mt.pad, "Half extent in units of the largest L")->capture_default_str();
  m->add_option("--sign", mt.sign, "+ or -, the S column written to the CSV")->capture_default_str();
  m->add_option("--out", mt.out, "CSV of L, S");

  WignerArgs wg;
  auto* w = app.add_subcommand("wigner", "Wigner function, marginals and Hudson check");
  w->add_option("--state", wg.state, "gaussian, two-gaussian, excited, oscillator:n, psi-plus:L, psi-minus:L")
      ->capture_default_str();
  add_grid(w, wg.grid, 256);
  add_packet(w, wg.packet);
  w->add_option("--out", wg.out, "CSV of the W grid");

  ParityArgs pa;
  auto* p = app.add_subcommand("parity-chsh", "Displaced-parity CHSH for the two-mode squeezed vacuum");
  p->add_option("--r", pa.r, "Squeezing")->required();
  p->add_flag("--optimize", pa.optimize, "Search the displacements (default without --alphas)");
  p->add_option("--seed", pa.seed, "Seed for the search")->capture_default_str();
  p->add_option("--family", pa.family, "anchored or general")->capture_default_str();
  p->add_option("--alphas", pa.alphas, "alpha,alpha',beta,beta' as re or re:im")->delimiter(',');

  AkArgs ak;
  auto* a = app.add_subcommand("ak-compare", "Arthurs-Kelly readout against the Roy-Singh map");
  add_packet(a, ak.packet);
  a->add_option("--b", ak.b, "Apparatus width")->capture_default_str();
  a->add_option("--epsilon", ak.epsilon, "+1 or -1")->capture_default_str();
  add_grid(a, ak.grid, 2048);
  a->add_option("--out", ak.out, "CSV of q, p_ak, p_rs");

  DumpArgs dump;
  auto* wv = app.add_subcommand("waves", "Wavefunction utilities");
  wv->require_subcommand(1);
  auto* d = wv->add_subcommand("dump", "Write a density as CSV");
  d->add_option("--state", dump.state,
                "gaussian, two-gaussian, excited, oscillator:n, gaussian2d, product, psi-plus:L, psi-minus:L")
      ->capture_default_str();
  d->add_option("--rep", dump.rep, "x or p (1-D), qq, qp, pq or pp (2-D)");
  add_grid(d, dump.grid, 1024);
  add_packet(d, dump.packet);
  d->add_option("--gauss", dump.gauss, "a11,a12,a22,b11,b12,b22,c1,c2,p1,p2 of the 2-D Gaussian")->delimiter(',');
  d->add_option("--out", dump.out, "CSV path");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  Sink sink(format == "csv", out);
  try {
    if (c->parsed()) return run_chsh(chsh, in, sink);
    if (l->parsed()) return run_lhv(lhv_args, in, sink);
    if (r1->parsed()) return run_rs1d(rs1, in, sink);
    if (r2->parsed()) return run_rs2d(rs2, in, sink);
    if (m->parsed()) return run_marginal_theorem(mt, sink);
    if (w->parsed()) return run_wigner(wg, in, sink);
    if (p->parsed()) return run_parity(pa, sink);
    if (a->parsed()) return run_ak(ak, sink);
    if (d->parsed()) return run_dump(dump, in, sink);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  err << "error: no subcommand\n";
  return kExitInput;
}

}  // namespace bellforge::cli
