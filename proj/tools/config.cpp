#include "config.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace ehs::cli {

namespace {

// Reads one mapping node, remembering which keys were consumed so that typos
// surface as errors instead of silently falling back to defaults.
class Reader {
 public:
  Reader(YAML::Node node, std::string path, const std::string* source)
      : node_(std::move(node)), path_(std::move(path)), source_(source) {
    if (node_.IsDefined() && !node_.IsNull() && !node_.IsMap()) fail(node_, "expected a mapping");
  }

  bool is_word(const std::string& key, const std::string& w) const {
    return has(key) && node_[key].IsScalar() && node_[key].Scalar() == w;
  }
  bool has(const std::string& key) const { return node_.IsMap() && node_[key].IsDefined() && !node_[key].IsNull(); }

  double num(const std::string& key, double def) {
    const std::optional<YAML::Node> on = take(key);
    const YAML::Node n = on ? *on : YAML::Node();
    return on ? scalar<double>(n, key, "a number") : def;
  }
  double positive(const std::string& key, double def) {
    const double v = num(key, def);
    if (!(v > 0.0)) fail_key(key, "must be positive");
    return v;
  }
  double nonneg(const std::string& key, double def) {
    const double v = num(key, def);
    if (!(v >= 0.0)) fail_key(key, "must be >= 0");
    return v;
  }
  int integer(const std::string& key, int def, int min) {
    const std::optional<YAML::Node> on = take(key);
    const YAML::Node n = on ? *on : YAML::Node();
    const int v = on ? scalar<int>(n, key, "an integer") : def;
    if (v < min) fail(on ? n : node_, key, fmt::format("must be >= {}", min));
    return v;
  }
  bool flag(const std::string& key, bool def) {
    const std::optional<YAML::Node> on = take(key);
    const YAML::Node n = on ? *on : YAML::Node();
    return on ? scalar<bool>(n, key, "true or false") : def;
  }
  std::string choice(const std::string& key, const std::string& def, const std::set<std::string>& allowed) {
    const std::optional<YAML::Node> on = take(key);
    const YAML::Node n = on ? *on : YAML::Node();
    const std::string v = on ? scalar<std::string>(n, key, "a string") : def;
    if (!allowed.count(v)) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      fail(on ? n : node_, key, "must be one of " + list);
    }
    return v;
  }
  std::string text(const std::string& key, const std::string& def) {
    const std::optional<YAML::Node> on = take(key);
    const YAML::Node n = on ? *on : YAML::Node();
    return on ? scalar<std::string>(n, key, "a string") : def;
  }
  std::vector<double> nums(const std::string& key, const std::vector<double>& def, std::size_t min_size = 0) {
    const std::optional<YAML::Node> on = take(key);
    const YAML::Node n = on ? *on : YAML::Node();
    if (!on) return def;
    if (!n.IsSequence()) fail(n, key, "expected a list of numbers");
    std::vector<double> v;
    for (const auto& e : n) v.push_back(scalar<double>(e, key, "a number"));
    if (v.size() < min_size) fail(n, key, fmt::format("needs at least {} entries", min_size));
    return v;
  }
  template <std::size_t N>
  std::array<double, N> fixed(const std::string& key, const std::array<double, N>& def) {
    const std::vector<double> v = nums(key, std::vector<double>(def.begin(), def.end()));
    if (v.size() != N) fail_key(key, fmt::format("expected exactly {} numbers", N));
    std::array<double, N> out;
    std::copy(v.begin(), v.end(), out.begin());
    return out;
  }
  std::array<int, 4> grid(const std::string& key, const std::array<int, 4>& def) {
    const std::optional<YAML::Node> on = take(key);
    const YAML::Node n = on ? *on : YAML::Node();
    if (!on) return def;
    if (!n.IsSequence() || n.size() != 4) fail(n, key, "expected four integers (theta1, theta2, phi1, phi2)");
    std::array<int, 4> g;
    for (int k = 0; k < 4; ++k) {
      g[k] = scalar<int>(n[k], key, "an integer");
      if (g[k] < 8) fail(n[k], key, "grid counts must be >= 8");
    }
    return g;
  }
  std::vector<std::string> words(const std::string& key, const std::vector<std::string>& def) {
    const std::optional<YAML::Node> on = take(key);
    const YAML::Node n = on ? *on : YAML::Node();
    if (!on) return def;
    if (!n.IsSequence()) fail(n, key, "expected a list of strings");
    std::vector<std::string> v;
    for (const auto& e : n) v.push_back(scalar<std::string>(e, key, "a string"));
    return v;
  }

  Reader child(const std::string& key) {
    const std::optional<YAML::Node> on = take(key);
    const YAML::Node n = on ? *on : YAML::Node();
    return Reader(on ? n : YAML::Node(YAML::NodeType::Undefined), sub(key), source_);
  }
  std::vector<Reader> children(const std::string& key, bool& present) {
    const std::optional<YAML::Node> on = take(key);
    const YAML::Node n = on ? *on : YAML::Node();
    present = static_cast<bool>(on);
    std::vector<Reader> out;
    if (!on) return out;
    if (!n.IsSequence()) fail(n, key, "expected a list of mappings");
    for (std::size_t k = 0; k < n.size(); ++k) out.emplace_back(n[k], fmt::format("{}[{}]", sub(key), k), source_);
    return out;
  }

  // Rejects keys that were never read.
  void finish() const {
    if (!node_.IsMap()) return;
    for (const auto& kv : node_) {
      const std::string k = kv.first.as<std::string>();
      if (!used_.count(k)) fail(kv.first, k, "unknown key");
    }
  }

  [[noreturn]] void fail_key(const std::string& key, const std::string& msg) const {
    const YAML::Node n = node_.IsMap() ? YAML::Node(node_[key]) : YAML::Node();
    fail_at(n.IsDefined() && !n.IsNull() ? n : node_, sub(key), msg);
  }
  [[noreturn]] void fail(const YAML::Node& n, const std::string& msg) const { fail_at(n, path_, msg); }
  [[noreturn]] void fail(const YAML::Node& n, const std::string& key, const std::string& msg) const {
    fail_at(n, sub(key), msg);
  }

 private:
  std::optional<YAML::Node> take(const std::string& key) {
    used_.insert(key);
    if (!node_.IsMap()) return std::nullopt;
    YAML::Node n = node_[key];
    if (!n.IsDefined() || n.IsNull()) return std::nullopt;
    return n;
  }
  template <class T>
  T scalar(const YAML::Node& n, const std::string& key, const char* what) const {
    if (!n.IsScalar()) fail(n, key, std::string("expected ") + what);
    try {
      const T v = n.as<T>();
      if constexpr (std::is_same_v<T, double>)
        if (!std::isfinite(v)) fail(n, key, "must be finite");
      return v;
    } catch (const YAML::Exception&) {
      fail(n, key, std::string("expected ") + what + ", got '" + n.Scalar() + "'");
    }
  }
  std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  [[noreturn]] void fail_at(const YAML::Node& n, const std::string& field, const std::string& msg) const {
    const YAML::Mark m = n.IsDefined() ? n.Mark() : node_.Mark();
    if (m.line >= 0)
      throw ConfigError(fmt::format("{}:{}:{}: {}: {}", *source_, m.line + 1, m.column + 1, field, msg));
    throw ConfigError(fmt::format("{}: {}: {}", *source_, field, msg));
  }

  YAML::Node node_;
  std::string path_;
  const std::string* source_;
  std::set<std::string> used_;
};

const std::set<std::string> axis_names{"q1", "q2", "q3", "q5"};

void read_spectrum(Reader r, SpectrumConfig& c) {
  c.kappa = r.nonneg("kappa", c.kappa);
  c.locus_gap = r.positive("locus_gap", c.locus_gap);
  bool present = false;
  std::vector<Reader> scans = r.children("scans", present);
  if (!present) {
    ScanSpec ring;
    ring.name = "ring";
    ring.axes = {"q1", "q2"};
    ScanSpec sphere;
    sphere.name = "sphere";
    sphere.axes = {"q1", "q2", "q3"};
    sphere.lo = -1.5;
    sphere.hi = 1.5;
    sphere.n = 41;
    c.scans = {ring, sphere};
  }
  for (std::size_t k = 0; k < scans.size(); ++k) {
    Reader& s = scans[k];
    ScanSpec sc;
    sc.name = s.text("name", "scan" + std::to_string(k));
    sc.axes = s.words("axes", {"q1", "q2"});
    if (sc.axes.size() < 2 || sc.axes.size() > 3) s.fail_key("axes", "needs 2 or 3 axes");
    for (const auto& a : sc.axes)
      if (!axis_names.count(a)) s.fail_key("axes", "axes must be among q1, q2, q3, q5");
    const auto base = s.fixed<5>("base", {0, 0, 0, 0, 0});
    for (int i = 0; i < 5; ++i) sc.base(i) = base[i];
    const auto range = s.fixed<2>("range", {sc.lo, sc.hi});
    sc.lo = range[0];
    sc.hi = range[1];
    if (!(sc.hi > sc.lo)) s.fail_key("range", "needs lo < hi");
    sc.n = s.integer("n", sc.n, 2);
    s.finish();
    c.scans.push_back(sc);
  }
  Reader rot = r.child("rotations");
  c.rotation_R_outside = rot.positive("R_outside", c.rotation_R_outside);
  c.rotation_R_inside = rot.positive("R_inside", c.rotation_R_inside);
  c.rotation_samples = rot.integer("samples", c.rotation_samples, 16);
  rot.finish();
  Reader rnd = r.child("random_points");
  c.random_count = rnd.integer("count", c.random_count, 0);
  const auto rr = rnd.fixed<2>("R_range", {c.random_R_lo, c.random_R_hi});
  if (!(rr[0] > 0.0 && rr[1] > rr[0])) rnd.fail_key("R_range", "needs 0 < lo < hi");
  c.random_R_lo = rr[0];
  c.random_R_hi = rr[1];
  rnd.finish();
  r.finish();
}

void read_chern(Reader r, ChernConfig& c) {
  c.kappa = r.nonneg("kappa", c.kappa);
  c.R = r.nums("R", c.R, 1);
  for (double R : c.R)
    if (!(R > 0.0)) r.fail_key("R", "radii must be positive");
  c.grid = r.grid("grid", c.grid);
  c.fd_step = r.positive("fd_step", c.fd_step);
  c.max_refinements = r.integer("max_refinements", c.max_refinements, 0);
  c.defect_target = r.positive("defect_target", c.defect_target);
  c.fail_defect = r.positive("fail_defect", c.fail_defect);
  r.finish();
}

void read_wilson(Reader r, WilsonConfig& c) {
  c.kappa = r.nonneg("kappa", c.kappa);
  Reader s = r.child("slice");
  c.slice_R = s.positive("R", c.slice_R);
  const auto t2 = s.fixed<2>("theta2_range", {c.theta2_lo, c.theta2_hi});
  c.theta2_lo = t2[0];
  c.theta2_hi = t2[1];
  c.theta2_points = s.integer("points", c.theta2_points, 2);
  s.finish();
  Reader m = r.child("min_radius");
  c.min_R = m.nums("R", c.min_R);
  c.min_theta2_points = m.integer("theta2_points", c.min_theta2_points, 3);
  m.finish();
  Reader mo = r.child("moebius");
  c.moebius_R = mo.positive("R", c.moebius_R);
  c.moebius_delta = mo.nums("delta", c.moebius_delta);
  c.moebius_steps = mo.integer("steps_per_cycle", c.moebius_steps, 64);
  c.transition = mo.flag("transition", c.transition);
  const auto br = mo.fixed<2>("transition_bracket", {c.transition_lo, c.transition_hi});
  c.transition_lo = br[0];
  c.transition_hi = br[1];
  c.transition_tol = mo.positive("transition_tol", c.transition_tol);
  mo.finish();
  Reader t = r.child("transport");
  c.transport_R = t.positive("R", c.transport_R);
  c.transport_theta2 = t.nums("theta2", c.transport_theta2);
  c.transport_initial = t.integer("initial_index", c.transport_initial, 0);
  if (c.transport_initial > 1) t.fail_key("initial_index", "must be 0 or 1");
  c.transport_samples = t.integer("samples", c.transport_samples, 2);
  t.finish();
  r.finish();
}

void read_cqed(Reader r, CqedRunConfig& c) {
  Reader m = r.child("model");
  CqedConfig& k = c.model;
  k.omega_e = m.fixed<2>("omega_e", k.omega_e);
  k.omega_f = m.fixed<2>("omega_f", k.omega_f);
  k.omega_r = m.positive("omega_r", k.omega_r);
  k.g_r = m.positive("g_r", k.g_r);
  k.kappa = m.nonneg("kappa", k.kappa);
  k.Xi = m.num("Xi", k.Xi);
  k.Lambda1 = m.nonneg("Lambda1", k.Lambda1);
  k.Lambda2 = m.nonneg("Lambda2", k.Lambda2);
  k.phase1 = m.num("phase1", k.phase1);
  k.phase2 = m.num("phase2", k.phase2);
  k.fock_cutoff = m.integer("fock_cutoff", k.fock_cutoff, 2);
  k.dissipator = m.choice("dissipator", "secular", {"secular", "literal"}) == "literal" ? DissipatorModel::literal
                                                                                        : DissipatorModel::secular;
  if (m.is_word("drives", "auto")) {
    m.text("drives", "auto");
  } else if (m.has("drives")) {
    Reader d = m.child("drives");
    k.auto_drives = false;
    k.lambda = d.fixed<4>("lambda", k.lambda);
    k.xi = d.fixed<4>("xi", k.xi);
    k.phi = d.fixed<4>("phi", k.phi);
    d.finish();
  }
  m.finish();

  Reader t = r.child("trajectory");
  c.trajectory_model = t.choice("model", c.trajectory_model, {"effective", "full"});
  c.initial = t.choice("initial", c.initial, {"fg0", "1+", "gf0", "1-"});
  c.t_max = t.nonneg("t_max", c.t_max);
  c.trajectory_samples = t.integer("samples", c.trajectory_samples, 2);
  c.lindblad = t.flag("lindblad", c.lindblad);
  t.finish();

  Reader f = r.child("fits");
  bool present = false;
  std::vector<Reader> pts = f.children("points", present);
  if (present) c.fit_points.clear();
  for (Reader& p : pts) {
    FitPoint fp;
    fp.R_over_kappa = p.positive("R_over_kappa", fp.R_over_kappa);
    fp.angles = p.fixed<4>("angles", fp.angles);
    p.finish();
    c.fit_points.push_back(fp);
  }
  c.fit_samples = f.integer("samples", c.fit_samples, 2);
  f.finish();

  Reader p = r.child("protocol");
  c.protocol_R = p.nums("R_over_kappa", c.protocol_R);
  c.protocol_grid = p.grid("grid", c.protocol_grid);
  c.protocol_fd_step = p.positive("fd_step", c.protocol_fd_step);
  c.protocol_samples = p.integer("samples", c.protocol_samples, 2);
  p.finish();
  r.finish();
}

const char* dissipator_name(DissipatorModel m) { return m == DissipatorModel::literal ? "literal" : "secular"; }

Json angles_json(const Angles& a) { return Json::array({a[0], a[1], a[2], a[3]}); }

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& command, const std::string& source) {
  static const std::set<std::string> commands{"spectrum", "chern", "wilson", "cqed"};
  if (!commands.count(command)) throw ConfigError("unknown command '" + command + "'");
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(fmt::format("{}:{}:{}: {}", source, e.mark.line + 1, e.mark.column + 1, e.msg));
  }
  Reader top(root, "", &source);
  RunConfig cfg;
  cfg.command = command;
  {
    const double s = top.num("seed", 1.0);
    if (!(s >= 0.0) || s != std::floor(s) || s > 9.0e15) top.fail_key("seed", "must be a non-negative integer");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  // blocks of other commands are allowed but not read
  for (const auto& c : commands)
    if (c != command) top.child(c);
  if (command == "spectrum") read_spectrum(top.child("spectrum"), cfg.spectrum);
  if (command == "chern") read_chern(top.child("chern"), cfg.chern);
  if (command == "wilson") read_wilson(top.child("wilson"), cfg.wilson);
  if (command == "cqed") read_cqed(top.child("cqed"), cfg.cqed);
  top.finish();
  if (command == "cqed") {
    try {
      validate_config(cfg.cqed.model);
    } catch (const std::exception& e) {
      throw ConfigError(source + ": cqed.model: " + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path, const std::string& command) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), command, path);
}

Json resolved_json(const RunConfig& cfg) {
  Json j;
  j["command"] = cfg.command;
  j["seed"] = cfg.seed;
  Json b;
  if (cfg.command == "spectrum") {
    const SpectrumConfig& c = cfg.spectrum;
    b["kappa"] = c.kappa;
    b["locus_gap"] = c.locus_gap;
    b["scans"] = Json::array();
    for (const auto& s : c.scans)
      b["scans"].push_back({{"name", s.name},
                            {"axes", s.axes},
                            {"base", Json::array({s.base(0), s.base(1), s.base(2), s.base(3), s.base(4)})},
                            {"range", Json::array({s.lo, s.hi})},
                            {"n", s.n}});
    b["rotations"] = {{"R_outside", c.rotation_R_outside},
                      {"R_inside", c.rotation_R_inside},
                      {"samples", c.rotation_samples}};
    b["random_points"] = {{"count", c.random_count}, {"R_range", Json::array({c.random_R_lo, c.random_R_hi})}};
  } else if (cfg.command == "chern") {
    const ChernConfig& c = cfg.chern;
    b["kappa"] = c.kappa;
    b["R"] = c.R;
    b["grid"] = c.grid;
    b["fd_step"] = c.fd_step;
    b["max_refinements"] = c.max_refinements;
    b["defect_target"] = c.defect_target;
    b["fail_defect"] = c.fail_defect;
  } else if (cfg.command == "wilson") {
    const WilsonConfig& c = cfg.wilson;
    b["kappa"] = c.kappa;
    b["slice"] = {{"R", c.slice_R}, {"theta2_range", Json::array({c.theta2_lo, c.theta2_hi})}, {"points", c.theta2_points}};
    b["min_radius"] = {{"R", c.min_R}, {"theta2_points", c.min_theta2_points}};
    b["moebius"] = {{"R", c.moebius_R},
                    {"delta", c.moebius_delta},
                    {"steps_per_cycle", c.moebius_steps},
                    {"transition", c.transition},
                    {"transition_bracket", Json::array({c.transition_lo, c.transition_hi})},
                    {"transition_tol", c.transition_tol}};
    b["transport"] = {{"R", c.transport_R},
                      {"theta2", c.transport_theta2},
                      {"initial_index", c.transport_initial},
                      {"samples", c.transport_samples}};
  } else {
    const CqedRunConfig& c = cfg.cqed;
    const CqedConfig& k = c.model;
    Json m;
    m["omega_e"] = k.omega_e;
    m["omega_f"] = k.omega_f;
    m["omega_r"] = k.omega_r;
    m["g_r"] = k.g_r;
    m["kappa"] = k.kappa;
    m["Xi"] = k.Xi;
    m["Lambda1"] = k.Lambda1;
    m["Lambda2"] = k.Lambda2;
    m["phase1"] = k.phase1;
    m["phase2"] = k.phase2;
    m["fock_cutoff"] = k.fock_cutoff;
    m["dissipator"] = dissipator_name(k.dissipator);
    if (k.auto_drives)
      m["drives"] = "auto";
    else
      m["drives"] = {{"lambda", k.lambda}, {"xi", k.xi}, {"phi", k.phi}};
    b["model"] = m;
    b["trajectory"] = {{"model", c.trajectory_model},
                       {"initial", c.initial},
                       {"t_max", c.t_max},
                       {"samples", c.trajectory_samples},
                       {"lindblad", c.lindblad}};
    Json pts = Json::array();
    for (const auto& p : c.fit_points) pts.push_back({{"R_over_kappa", p.R_over_kappa}, {"angles", angles_json(p.angles)}});
    b["fits"] = {{"points", pts}, {"samples", c.fit_samples}};
    b["protocol"] = {{"R_over_kappa", c.protocol_R},
                     {"grid", c.protocol_grid},
                     {"fd_step", c.protocol_fd_step},
                     {"samples", c.protocol_samples}};
  }
  j[cfg.command] = b;
  return j;
}

}  // namespace ehs::cli
