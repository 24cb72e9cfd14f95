#include "lddmm/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lddmm/error.hpp"

namespace lddmm {

using json = nlohmann::ordered_json;

namespace {

// Strict view of a JSON object: every key must be consumed or the read fails.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw SchemaError(where() + " must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& at(const std::string& key) {
    if (!j_.contains(key)) throw SchemaError("missing field '" + child(key) + "'");
    used_.insert(key);
    return j_.at(key);
  }

  template <class T>
  T get(const std::string& key) {
    const json& v = at(key);
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      throw SchemaError("field '" + child(key) + "' has the wrong type");
    }
  }

  template <class T>
  T get_or(const std::string& key, T fallback) {
    return has(key) ? get<T>(key) : fallback;
  }

  double number(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) throw SchemaError("field '" + child(key) + "' must be a number");
    return v.get<double>();
  }

  double number_or(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  int integer(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number_integer()) throw SchemaError("field '" + child(key) + "' must be an integer");
    return v.get<int>();
  }

  int integer_or(const std::string& key, int fallback) { return has(key) ? integer(key) : fallback; }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw SchemaError("unknown field '" + child(it.key()) + "'");
  }

 private:
  std::string where() const { return path_.empty() ? "document" : "'" + path_ + "'"; }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t pos = std::min<std::size_t>(e.byte, text.size());
    const long line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n');
    throw SchemaError(origin + ":" + std::to_string(line) + ": " + e.what());
  }
}

std::string indexed(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const json& array_field(Fields& f, const std::string& key) {
  const json& v = f.at(key);
  if (!v.is_array()) throw SchemaError("field '" + f.child(key) + "' must be an array");
  return v;
}

std::vector<double> number_list(const json& v, const std::string& path) {
  if (!v.is_array()) throw SchemaError("field '" + path + "' must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw SchemaError("field '" + indexed(path, i) + "' must be a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

std::vector<std::vector<double>> point_list(const json& v, const std::string& path) {
  if (!v.is_array()) throw SchemaError("field '" + path + "' must be an array of points");
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number_list(v[i], indexed(path, i)));
  return out;
}

KernelSpec parse_kernel(const json& j, const std::string& path) {
  Fields f(j, path);
  KernelSpec k;
  try {
    k.family = parse_family(f.get<std::string>("family"));
  } catch (const InvalidInput& e) {
    throw SchemaError("field '" + f.child("family") + "': " + e.what());
  }
  k.sigma = f.number("sigma");
  f.finish();
  if (!(k.sigma > 0.0)) throw SchemaError("field '" + f.child("sigma") + "' must be positive");
  return k;
}

CurveSpec parse_curve(const json& j, const std::string& path) {
  Fields f(j, path);
  CurveSpec c;
  c.type = f.get<std::string>("type");
  if (c.type == "points") {
    c.points = point_list(f.at("points"), f.child("points"));
    f.finish();
    return c;
  }
  c.n = f.integer("n");
  c.center = number_list(f.at("center"), f.child("center"));
  if (c.center.size() != 2) throw SchemaError("field '" + f.child("center") + "' must hold 2 numbers");
  if (c.type == "circle") {
    c.radius = f.number("radius");
  } else if (c.type == "flower") {
    c.r0 = f.number("r0");
    c.amplitude = f.number("amplitude");
    c.petals = f.integer("petals");
  } else if (c.type == "ellipse") {
    c.a = f.number("a");
    c.b = f.number("b");
  } else {
    throw SchemaError("field '" + f.child("type") + "' must be circle, flower, ellipse or points");
  }
  f.finish();
  return c;
}

ShapeSource parse_source(const json& j, const std::string& path) {
  Fields f(j, path);
  ShapeSource s;
  if (f.has("file")) {
    s.file = f.get<std::string>("file");
    f.finish();
    return s;
  }
  const json& groups = array_field(f, "groups");
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const std::string gp = indexed(f.child("groups"), i);
    Fields g(groups[i], gp);
    GroupSource src;
    src.name = g.get<std::string>("name");
    if (g.has("copy")) src.copy = g.get<std::string>("copy");
    if (g.has("shape")) src.curve = parse_curve(g.at("shape"), g.child("shape"));
    if (src.copy.empty() == !src.curve.has_value())
      throw SchemaError("'" + gp + "' needs exactly one of 'shape' or 'copy'");
    g.finish();
    s.groups.push_back(std::move(src));
  }
  f.finish();
  return s;
}

ConstraintDecl parse_constraint(const json& j, const std::string& path) {
  Fields f(j, path);
  ConstraintDecl c;
  c.type = f.get<std::string>("type");
  if (c.type == "volume") {
    c.group = f.get<std::string>("group");
  } else if (c.type == "stitched") {
    c.a = f.get<std::string>("a");
    c.b = f.get<std::string>("b");
  } else if (c.type == "sliding") {
    c.group = f.get<std::string>("group");
    c.field = f.get<std::string>("field");
  } else if (c.type == "linear") {
    c.rows = point_list(f.at("rows"), f.child("rows"));
  } else {
    throw SchemaError("field '" + f.child("type") + "' must be volume, stitched, sliding or linear");
  }
  f.finish();
  return c;
}

void parse_options(const json& j, const std::string& path, SolverOptions& o) {
  Fields f(j, path);
  o.steps = f.integer_or("steps", o.steps);
  o.max_outer_iters = f.integer_or("max_outer_iters", o.max_outer_iters);
  o.max_inner_iters = f.integer_or("max_inner_iters", o.max_inner_iters);
  o.grad_tol = f.number_or("grad_tol", o.grad_tol);
  o.preconditioner_shift = f.number_or("preconditioner_shift", o.preconditioner_shift);
  if (f.has("armijo")) {
    Fields a(f.at("armijo"), f.child("armijo"));
    o.armijo.c1 = a.number_or("c1", o.armijo.c1);
    o.armijo.shrink = a.number_or("shrink", o.armijo.shrink);
    o.armijo.max_backtracks = a.integer_or("max_backtracks", o.armijo.max_backtracks);
    o.armijo.initial_step = a.number_or("initial_step", o.armijo.initial_step);
    a.finish();
  }
  if (f.has("al")) {
    Fields a(f.at("al"), f.child("al"));
    o.al.mu0 = a.number_or("mu0", o.al.mu0);
    o.al.mu_shrink = a.number_or("mu_shrink", o.al.mu_shrink);
    o.al.mu_min = a.number_or("mu_min", o.al.mu_min);
    o.al.constraint_tol = a.number_or("constraint_tol", o.al.constraint_tol);
    a.finish();
  }
  f.finish();
  try {
    o.validate();
  } catch (const InvalidInput& e) {
    throw SchemaError("'" + path + "': " + e.what());
  }
}

json curve_json(const CurveSpec& c) {
  json j;
  j["type"] = c.type;
  if (c.type == "points") {
    j["points"] = c.points;
    return j;
  }
  j["n"] = c.n;
  j["center"] = c.center;
  if (c.type == "circle") {
    j["radius"] = c.radius;
  } else if (c.type == "flower") {
    j["r0"] = c.r0;
    j["amplitude"] = c.amplitude;
    j["petals"] = c.petals;
  } else {
    j["a"] = c.a;
    j["b"] = c.b;
  }
  return j;
}

json source_json(const ShapeSource& s) {
  json j;
  if (!s.file.empty()) {
    j["file"] = s.file;
    return j;
  }
  j["groups"] = json::array();
  for (const auto& g : s.groups) {
    json e;
    e["name"] = g.name;
    if (g.curve) e["shape"] = curve_json(*g.curve);
    else e["copy"] = g.copy;
    j["groups"].push_back(std::move(e));
  }
  return j;
}

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

double to_double(const std::string& s, const std::string& origin, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw SchemaError(origin + ":" + std::to_string(line) + ": expected a number, got '" + s + "'");
  }
}

int to_int(const std::string& s, const std::string& origin, int line) {
  const double v = to_double(s, origin, line);
  if (v != static_cast<int>(v))
    throw SchemaError(origin + ":" + std::to_string(line) + ": expected an integer, got '" + s + "'");
  return static_cast<int>(v);
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw InvalidInput("failed writing '" + path.string() + "'");
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  const json root = parse_json(text, origin);
  Fields f(root, "");
  ExperimentConfig c;
  c.name = f.get_or<std::string>("name", c.name);
  c.dim = f.integer_or("dim", c.dim);
  if (c.dim < 1) throw SchemaError("field 'dim' must be >= 1");

  const json& fields = array_field(f, "fields");
  if (fields.empty()) throw SchemaError("field 'fields' must list at least one field");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const std::string fp = indexed("fields", i);
    Fields e(fields[i], fp);
    FieldSpec spec;
    spec.name = e.get<std::string>("name");
    spec.kernel = parse_kernel(e.at("kernel"), e.child("kernel"));
    spec.groups = e.get<std::vector<std::string>>("groups");
    e.finish();
    c.fields.push_back(std::move(spec));
  }
  c.q0 = parse_source(f.at("q0"), "q0");
  c.target = parse_source(f.at("target"), "target");
  c.attachment_weight = f.number_or("attachment_weight", c.attachment_weight);
  if (!(c.attachment_weight > 0.0)) throw SchemaError("field 'attachment_weight' must be positive");
  if (f.has("constraints")) {
    const json& cs = array_field(f, "constraints");
    for (std::size_t i = 0; i < cs.size(); ++i) c.constraints.push_back(parse_constraint(cs[i], indexed("constraints", i)));
  }
  c.solver = f.get_or<std::string>("solver", c.solver);
  if (c.solver != "shooting" && c.solver != "augmented_lagrangian")
    throw SchemaError("field 'solver' must be 'shooting' or 'augmented_lagrangian'");
  if (f.has("options")) parse_options(f.at("options"), "options", c.options);
  if (f.has("initial_momentum")) {
    Fields m(f.at("initial_momentum"), "initial_momentum");
    c.initial_momentum.kind = m.get<std::string>("kind");
    if (c.initial_momentum.kind == "random") {
      c.initial_momentum.scale = m.number("scale");
    } else if (c.initial_momentum.kind == "values") {
      c.initial_momentum.values = number_list(m.at("values"), m.child("values"));
    } else if (c.initial_momentum.kind != "zero") {
      throw SchemaError("field 'initial_momentum.kind' must be zero, random or values");
    }
    m.finish();
  }
  if (f.has("grid")) {
    Fields g(f.at("grid"), "grid");
    c.grid.resolution = g.integer_or("resolution", c.grid.resolution);
    c.grid.margin = g.number_or("margin", c.grid.margin);
    g.finish();
    if (c.grid.resolution < 2) throw SchemaError("field 'grid.resolution' must be >= 2");
  }
  c.output = f.get_or<std::string>("output", c.output);
  c.seed = f.get_or<std::uint64_t>("seed", c.seed);
  f.finish();
  return c;
}

ExperimentConfig read_config(const std::filesystem::path& path) {
  return parse_config(read_text(path), path.string());
}

std::string config_to_string(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["dim"] = c.dim;
  j["fields"] = json::array();
  for (const auto& f : c.fields) {
    json e;
    e["name"] = f.name;
    e["kernel"] = {{"family", std::string(family_name(f.kernel.family))}, {"sigma", f.kernel.sigma}};
    e["groups"] = f.groups;
    j["fields"].push_back(std::move(e));
  }
  j["q0"] = source_json(c.q0);
  j["target"] = source_json(c.target);
  j["attachment_weight"] = c.attachment_weight;
  j["constraints"] = json::array();
  for (const auto& k : c.constraints) {
    json e;
    e["type"] = k.type;
    if (k.type == "volume") e["group"] = k.group;
    if (k.type == "stitched") {
      e["a"] = k.a;
      e["b"] = k.b;
    }
    if (k.type == "sliding") {
      e["group"] = k.group;
      e["field"] = k.field;
    }
    if (k.type == "linear") e["rows"] = k.rows;
    j["constraints"].push_back(std::move(e));
  }
  j["solver"] = c.solver;
  const SolverOptions& o = c.options;
  j["options"] = {{"steps", o.steps},
                  {"max_outer_iters", o.max_outer_iters},
                  {"max_inner_iters", o.max_inner_iters},
                  {"grad_tol", o.grad_tol},
                  {"preconditioner_shift", o.preconditioner_shift},
                  {"armijo",
                   {{"c1", o.armijo.c1},
                    {"shrink", o.armijo.shrink},
                    {"max_backtracks", o.armijo.max_backtracks},
                    {"initial_step", o.armijo.initial_step}}},
                  {"al",
                   {{"mu0", o.al.mu0},
                    {"mu_shrink", o.al.mu_shrink},
                    {"mu_min", o.al.mu_min},
                    {"constraint_tol", o.al.constraint_tol}}}};
  json m;
  m["kind"] = c.initial_momentum.kind;
  if (c.initial_momentum.kind == "random") m["scale"] = c.initial_momentum.scale;
  if (c.initial_momentum.kind == "values") m["values"] = c.initial_momentum.values;
  j["initial_momentum"] = m;
  j["grid"] = {{"resolution", c.grid.resolution}, {"margin", c.grid.margin}};
  j["output"] = c.output;
  j["seed"] = c.seed;
  return j.dump(2) + "\n";
}

void write_config(const ExperimentConfig& cfg, const std::filesystem::path& path) {
  write_text(path, config_to_string(cfg));
}

LandmarkState parse_shape(const std::string& text, const std::string& origin) {
  const json root = parse_json(text, origin);
  Fields f(root, "");
  const int dim = f.integer("dim");
  if (dim < 1) throw SchemaError(origin + ": field 'dim' must be >= 1");
  const json& groups = array_field(f, "groups");
  std::vector<std::vector<double>> points;
  std::vector<Group> out;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const std::string gp = indexed("groups", i);
    Fields g(groups[i], gp);
    Group group{g.get<std::string>("name"), {}};
    for (auto& p : point_list(g.at("points"), g.child("points"))) {
      if (static_cast<int>(p.size()) != dim)
        throw SchemaError(origin + ": a point of '" + gp + "' has dimension " + std::to_string(p.size()));
      group.indices.push_back(static_cast<int>(points.size()));
      points.push_back(std::move(p));
    }
    g.finish();
    out.push_back(std::move(group));
  }
  f.finish();
  try {
    return LandmarkState::from_points(dim, points, std::move(out));
  } catch (const InvalidInput& e) {
    throw SchemaError(origin + ": " + e.what());
  }
}

LandmarkState read_shape(const std::filesystem::path& path) { return parse_shape(read_text(path), path.string()); }

std::string shape_to_string(const LandmarkState& q) {
  // Groups are written in landmark order so that reading restores the indices.
  std::vector<const Group*> order;
  for (const auto& g : q.groups()) order.push_back(&g);
  int next = 0;
  for (const Group* g : order)
    for (int i : g->indices)
      if (i != next++)
        throw InvalidInput("shape files need groups laid out as consecutive landmark ranges");
  json j;
  j["dim"] = q.dim();
  j["groups"] = json::array();
  for (const Group* g : order) {
    json pts = json::array();
    for (int i : g->indices) {
      json p = json::array();
      for (int c = 0; c < q.dim(); ++c) p.push_back(q.point(i)[c]);
      pts.push_back(std::move(p));
    }
    j["groups"].push_back({{"name", g->name}, {"points", std::move(pts)}});
  }
  return j.dump(2) + "\n";
}

void write_shape(const LandmarkState& q, const std::filesystem::path& path) { write_text(path, shape_to_string(q)); }

std::string trajectory_to_string(const Trajectory& t) {
  const bool controlled = t.kind == Trajectory::Kind::Controlled;
  std::ostringstream out;
  out << "lddmm-trajectory 1\n";
  out << "kind " << (controlled ? "controlled" : "geodesic") << "\n";
  out << "dim " << t.dim << "\nlandmarks " << t.landmarks << "\nsteps " << t.steps << "\nconstraints "
      << t.constraint_rows << "\n";
  out << "[landmarks]\n# node t landmark x[dim] m[dim]\n";
  const int d = t.dim;
  for (int i = 0; i <= t.steps; ++i) {
    const bool has_m = controlled ? i < t.steps : true;
    for (int a = 0; a < t.landmarks; ++a) {
      out << i << ' ' << format_double(t.time(i)) << ' ' << a;
      for (int c = 0; c < d; ++c) out << ' ' << format_double(t.q[i][a * d + c]);
      for (int c = 0; c < d; ++c) out << ' ' << format_double(has_m ? t.m[i][a * d + c] : 0.0);
      out << '\n';
    }
  }
  out << "[nodes]\n# node t energy end_energy epsilon lambda[constraints]\n";
  for (int i = 0; i <= t.steps; ++i) {
    const double end = controlled && i < t.steps ? t.end_energy[i] : 0.0;
    const double eps = i < static_cast<int>(t.epsilon.size()) ? t.epsilon[i] : 0.0;
    out << i << ' ' << format_double(t.time(i)) << ' ' << format_double(t.energy[i]) << ' ' << format_double(end)
        << ' ' << format_double(eps);
    const bool has_l = i < static_cast<int>(t.lambda.size());
    for (int r = 0; r < t.constraint_rows; ++r) out << ' ' << format_double(has_l ? t.lambda[i][r] : 0.0);
    out << '\n';
  }
  return out.str();
}

Trajectory parse_trajectory(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto next = [&]() -> std::vector<std::string> {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#') continue;
      return tokens(line);
    }
    throw SchemaError(origin + ": unexpected end of file after line " + std::to_string(lineno));
  };
  auto expect = [&](const char* key) {
    const auto tok = next();
    if (tok.size() != 2 || tok[0] != key)
      throw SchemaError(origin + ":" + std::to_string(lineno) + ": expected '" + key + " <value>'");
    return tok[1];
  };

  const auto head = next();
  if (head.size() != 2 || head[0] != "lddmm-trajectory" || head[1] != "1")
    throw SchemaError(origin + ":" + std::to_string(lineno) + ": not an lddmm-trajectory 1 file");
  Trajectory t;
  const std::string kind = expect("kind");
  if (kind != "geodesic" && kind != "controlled")
    throw SchemaError(origin + ":" + std::to_string(lineno) + ": unknown trajectory kind '" + kind + "'");
  t.kind = kind == "controlled" ? Trajectory::Kind::Controlled : Trajectory::Kind::Geodesic;
  t.dim = to_int(expect("dim"), origin, lineno);
  t.landmarks = to_int(expect("landmarks"), origin, lineno);
  t.steps = to_int(expect("steps"), origin, lineno);
  t.constraint_rows = to_int(expect("constraints"), origin, lineno);
  if (t.dim < 1 || t.landmarks < 1 || t.steps < 1 || t.constraint_rows < 0)
    throw SchemaError(origin + ": header values out of range");
  const bool controlled = t.kind == Trajectory::Kind::Controlled;
  const int d = t.dim;
  const Eigen::Index nd = static_cast<Eigen::Index>(t.landmarks) * d;

  if (next() != std::vector<std::string>{"[landmarks]"})
    throw SchemaError(origin + ":" + std::to_string(lineno) + ": expected [landmarks]");
  t.q.assign(t.steps + 1, Vector(nd));
  std::vector<Vector> m(t.steps + 1, Vector(nd));
  for (int i = 0; i <= t.steps; ++i)
    for (int a = 0; a < t.landmarks; ++a) {
      const auto tok = next();
      if (static_cast<int>(tok.size()) != 3 + 2 * d || to_int(tok[0], origin, lineno) != i ||
          to_int(tok[2], origin, lineno) != a)
        throw SchemaError(origin + ":" + std::to_string(lineno) + ": malformed landmark row");
      for (int c = 0; c < d; ++c) {
        t.q[i][a * d + c] = to_double(tok[3 + c], origin, lineno);
        m[i][a * d + c] = to_double(tok[3 + d + c], origin, lineno);
      }
    }
  if (next() != std::vector<std::string>{"[nodes]"})
    throw SchemaError(origin + ":" + std::to_string(lineno) + ": expected [nodes]");
  std::vector<Vector> lambda;
  for (int i = 0; i <= t.steps; ++i) {
    const auto tok = next();
    if (static_cast<int>(tok.size()) != 5 + t.constraint_rows || to_int(tok[0], origin, lineno) != i)
      throw SchemaError(origin + ":" + std::to_string(lineno) + ": malformed node row");
    t.energy.push_back(to_double(tok[2], origin, lineno));
    if (controlled && i < t.steps) t.end_energy.push_back(to_double(tok[3], origin, lineno));
    t.epsilon.push_back(to_double(tok[4], origin, lineno));
    Vector l(t.constraint_rows);
    for (int r = 0; r < t.constraint_rows; ++r) l[r] = to_double(tok[5 + r], origin, lineno);
    lambda.push_back(std::move(l));
  }
  if (controlled) {
    m.pop_back();
    lambda.pop_back();
    t.epsilon.clear();
  }
  t.m = std::move(m);
  t.lambda = std::move(lambda);
  return t;
}

void write_trajectory(const Trajectory& traj, const std::filesystem::path& path) {
  write_text(path, trajectory_to_string(traj));
}

Trajectory read_trajectory(const std::filesystem::path& path) { return parse_trajectory(read_text(path), path.string()); }

std::string report_to_string(const SolveReport& r) {
  json j;
  j["solver"] = r.solver;
  j["termination"] = termination_name(r.termination);
  j["objective"] = r.objective;
  j["kinetic"] = r.kinetic;
  j["attachment"] = r.attachment;
  j["max_violation"] = r.max_violation;
  j["iterations"] = r.iterations;
  j["outer_iterations"] = r.outer_iterations;
  json metrics = json::object();
  for (const auto& [k, v] : r.metrics) metrics[k] = v;
  j["metrics"] = metrics;
  j["objectives"] = r.objectives;
  j["grad_norms"] = r.grad_norms;
  j["mu_history"] = r.mu_history;
  j["lambda_norms"] = r.lambda_norms;
  j["violations"] = r.violations;
  return j.dump(2) + "\n";
}

void write_report(const SolveReport& report, const std::filesystem::path& path) {
  write_text(path, report_to_string(report));
}

std::string grid_to_string(const GridSample& g) {
  std::ostringstream out;
  out << "lddmm-grid 1\nresolution " << g.resolution << "\nbox " << format_double(g.lower[0]) << ' '
      << format_double(g.lower[1]) << ' ' << format_double(g.upper[0]) << ' ' << format_double(g.upper[1]) << '\n';
  out << "# i j x0 y0 x1 y1\n";
  for (int i = 0; i < g.resolution; ++i)
    for (int j = 0; j < g.resolution; ++j) {
      const int k = i * g.resolution + j;
      out << i << ' ' << j << ' ' << format_double(g.start[2 * k]) << ' ' << format_double(g.start[2 * k + 1]) << ' '
          << format_double(g.end[2 * k]) << ' ' << format_double(g.end[2 * k + 1]) << '\n';
    }
  return out.str();
}

void write_grid(const GridSample& grid, const std::filesystem::path& path) { write_text(path, grid_to_string(grid)); }

}  // namespace lddmm
