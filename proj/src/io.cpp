#include "dmk/io.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace dmk {

namespace {

double finite_number(const Json& j, const std::string& where) {
  require(j.is_number(), ErrorCode::SchemaViolation, where + ": expected a number");
  double v = j.get<double>();
  require(std::isfinite(v), ErrorCode::SchemaViolation, where + ": number is not finite");
  return v;
}

Vec vec_from_json(const Json& j, int dim, const std::string& where) {
  require(j.is_array() && static_cast<int>(j.size()) == dim, ErrorCode::SchemaViolation,
          where + ": expected an array of " + std::to_string(dim) + " numbers");
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = finite_number(j[i], where);
  return v;
}

Json vec_to_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

int dim_field(const Json& j) {
  require(j.contains("dim") && j["dim"].is_number_integer(), ErrorCode::SchemaViolation,
          "missing integer field \"dim\"");
  int n = j["dim"].get<int>();
  require(n >= 2 && n <= 8, ErrorCode::SchemaViolation, "\"dim\" must be between 2 and 8");
  return n;
}

}  // namespace

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoError, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::SchemaViolation, path + ": " + e.what());
  }
}

void save_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::IoError, "cannot write " + path);
  out << content;
  require(out.good(), ErrorCode::IoError, "write failed: " + path);
}

void require_schema(const Json& j, const std::string& kind) {
  require(j.is_object(), ErrorCode::SchemaViolation, "document is not a JSON object");
  require(j.contains("schema") && j["schema"] == kSchemaTag, ErrorCode::SchemaViolation,
          "missing or unsupported \"schema\" (want \"dmk/1\")");
  require(j.contains("kind") && j["kind"] == kind, ErrorCode::SchemaViolation,
          "expected document kind \"" + kind + "\"");
}

DirectionWeightMeasure measure_from_json(const Json& j) {
  require(j.is_object(), ErrorCode::SchemaViolation, "measure: expected an object");
  require(j.contains("normals") && j["normals"].is_array(), ErrorCode::SchemaViolation,
          "measure: missing \"normals\" array");
  require(j.contains("weights") && j["weights"].is_array(), ErrorCode::SchemaViolation,
          "measure: missing \"weights\" array");
  const Json& normals = j["normals"];
  const Json& weights = j["weights"];
  require(normals.size() == weights.size() && !normals.empty(), ErrorCode::SchemaViolation,
          "measure: normals and weights must be nonempty and the same length");
  require(normals[0].is_array(), ErrorCode::SchemaViolation, "measure: normals[0] is not an array");
  int dim = static_cast<int>(normals[0].size());
  require(dim >= 2 && dim <= 8, ErrorCode::SchemaViolation,
          "measure: dimension must be between 2 and 8");
  if (j.contains("dim"))
    require(j["dim"].is_number_integer() && j["dim"].get<int>() == dim, ErrorCode::SchemaViolation,
            "measure: \"dim\" disagrees with the normals");

  DirectionWeightMeasure mu;
  for (size_t i = 0; i < normals.size(); ++i) {
    Vec u = vec_from_json(normals[i], dim, "measure: normals[" + std::to_string(i) + "]");
    require(u.norm() > 1e-14, ErrorCode::SchemaViolation,
            "measure: normals[" + std::to_string(i) + "] is a zero vector");
    mu.normals.push_back(u / u.norm());
    double w = finite_number(weights[i], "measure: weights[" + std::to_string(i) + "]");
    require(w > 0.0, ErrorCode::SchemaViolation,
            "measure: weights[" + std::to_string(i) + "] must be positive");
    mu.weights.push_back(w);
  }
  for (size_t i = 0; i < mu.normals.size(); ++i) {
    for (size_t l = i + 1; l < mu.normals.size(); ++l) {
      require((mu.normals[i] - mu.normals[l]).norm() > kDistinctNormalTol,
              ErrorCode::SchemaViolation,
              "measure: normals " + std::to_string(i) + " and " + std::to_string(l) +
                  " coincide");
    }
  }
  return mu;
}

Json measure_to_json(const DirectionWeightMeasure& mu) {
  Json j;
  j["schema"] = kSchemaTag;
  j["kind"] = "measure";
  j["dim"] = mu.dim();
  j["normals"] = Json::array();
  j["weights"] = Json::array();
  for (const Vec& u : mu.normals) j["normals"].push_back(vec_to_json(u));
  for (double w : mu.weights) j["weights"].push_back(w);
  return j;
}

HPolytope polytope_from_json(const Json& j) {
  require_schema(j, "polytope");
  int dim = dim_field(j);
  require(j.contains("normals") && j["normals"].is_array() && j.contains("offsets") &&
              j["offsets"].is_array(),
          ErrorCode::SchemaViolation, "polytope: missing \"normals\" or \"offsets\"");
  const Json& normals = j["normals"];
  const Json& offsets = j["offsets"];
  require(normals.size() == offsets.size() && !normals.empty(), ErrorCode::SchemaViolation,
          "polytope: normals and offsets must be nonempty and the same length");
  std::vector<Vec> ns;
  std::vector<double> ts;
  for (size_t i = 0; i < normals.size(); ++i) {
    Vec u = vec_from_json(normals[i], dim, "polytope: normals[" + std::to_string(i) + "]");
    require(u.norm() > 1e-14, ErrorCode::SchemaViolation,
            "polytope: normals[" + std::to_string(i) + "] is a zero vector");
    ns.push_back(u / u.norm());
    double t = finite_number(offsets[i], "polytope: offsets[" + std::to_string(i) + "]");
    require(t >= 0.0, ErrorCode::SchemaViolation,
            "polytope: offsets[" + std::to_string(i) + "] must be nonnegative");
    ts.push_back(t);
  }
  return build_hpolytope(std::move(ns), std::move(ts));
}

Json polytope_to_json(const HPolytope& P) {
  Json j;
  j["schema"] = kSchemaTag;
  j["kind"] = "polytope";
  j["dim"] = P.dim();
  j["normals"] = Json::array();
  for (const Vec& u : P.normals) j["normals"].push_back(vec_to_json(u));
  j["offsets"] = P.offsets;
  return j;
}

StarBody star_body_from_json(const Json& j, int dim) {
  require(j.is_object() && j.contains("type") && j["type"].is_string(),
          ErrorCode::SchemaViolation, "star body: expected an object with a \"type\" string");
  std::string type = j["type"].get<std::string>();
  if (type == "ball") {
    double r = j.contains("radius") ? finite_number(j["radius"], "star body: radius") : 1.0;
    require(r > 0.0, ErrorCode::SchemaViolation, "star body: radius must be positive");
    return StarBody::ball(dim, r);
  }
  if (type == "ellipsoid") {
    require(j.contains("shape") && j["shape"].is_array() &&
                static_cast<int>(j["shape"].size()) == dim,
            ErrorCode::SchemaViolation, "star body: \"shape\" must be a dim x dim matrix");
    Mat A(dim, dim);
    for (int r = 0; r < dim; ++r) {
      Vec row = vec_from_json(j["shape"][r], dim, "star body: shape row");
      A.row(r) = row.transpose();
    }
    return StarBody::ellipsoid(A);
  }
  if (type == "polytope_gauge") {
    Json pj = j;
    pj["schema"] = kSchemaTag;
    pj["kind"] = "polytope";
    pj["dim"] = dim;
    return StarBody::polytope_gauge(polytope_from_json(pj));
  }
  if (type == "radial_table_2d") {
    require(dim == 2, ErrorCode::SchemaViolation, "radial_table_2d requires dim 2");
    require(j.contains("angles") && j.contains("values"), ErrorCode::SchemaViolation,
            "star body: radial_table_2d needs \"angles\" and \"values\"");
    std::vector<double> angles, values;
    for (const auto& a : j["angles"]) angles.push_back(finite_number(a, "star body: angles"));
    for (const auto& v : j["values"]) values.push_back(finite_number(v, "star body: values"));
    return StarBody::radial_table_2d(std::move(angles), std::move(values));
  }
  if (type == "radial_table_3d") {
    require(dim == 3, ErrorCode::SchemaViolation, "radial_table_3d requires dim 3");
    require(j.contains("frequency") && j["frequency"].is_number_integer() && j.contains("values"),
            ErrorCode::SchemaViolation,
            "star body: radial_table_3d needs integer \"frequency\" and \"values\"");
    std::vector<double> values;
    for (const auto& v : j["values"]) values.push_back(finite_number(v, "star body: values"));
    return StarBody::radial_table_3d(j["frequency"].get<int>(), std::move(values));
  }
  fail(ErrorCode::SchemaViolation, "star body: unknown type \"" + type + "\"");
}

StarBody star_body_from_spec(const std::string& spec, int dim, Json* doc_out) {
  Json doc;
  if (!spec.empty() && spec.front() == '{') {
    try {
      doc = Json::parse(spec);
    } catch (const Json::parse_error& e) {
      fail(ErrorCode::SchemaViolation, std::string("--Q inline JSON: ") + e.what());
    }
  } else if (spec.size() > 5 && spec.substr(spec.size() - 5) == ".json") {
    doc = load_json_file(spec);
  } else {
    std::string name = spec;
    double r = 1.0;
    auto colon = spec.find(':');
    if (colon != std::string::npos) {
      name = spec.substr(0, colon);
      try {
        r = std::stod(spec.substr(colon + 1));
      } catch (const std::exception&) {
        fail(ErrorCode::SchemaViolation, "--Q: bad radius in \"" + spec + "\"");
      }
      require(std::isfinite(r) && r > 0.0, ErrorCode::SchemaViolation, "--Q: radius must be positive");
    }
    if (name == "ball") {
      doc = Json{{"type", "ball"}, {"radius", r}};
    } else if (name == "cube") {
      // Gauge of [-r, r]^n: 2n axis normals at offset r.
      Json normals = Json::array(), offsets = Json::array();
      for (int d = 0; d < dim; ++d) {
        for (int s : {1, -1}) {
          Json u = Json::array();
          for (int i = 0; i < dim; ++i) u.push_back(i == d ? static_cast<double>(s) : 0.0);
          normals.push_back(u);
          offsets.push_back(r);
        }
      }
      doc = Json{{"type", "polytope_gauge"}, {"normals", normals}, {"offsets", offsets}};
    } else {
      fail(ErrorCode::SchemaViolation, "--Q: unknown star body \"" + spec + "\"");
    }
  }
  if (doc_out) *doc_out = doc;
  return star_body_from_json(doc, dim);
}

std::function<double(const Vec&)> density_from_json(const Json& j, int n) {
  require(j.is_object() && j.contains("type") && j["type"].is_string(),
          ErrorCode::SchemaViolation, "density: expected an object with a \"type\" string");
  std::string type = j["type"].get<std::string>();
  if (type == "constant") {
    double v = finite_number(j.value("value", Json(1.0)), "density: value");
    require(v >= 0.0, ErrorCode::SchemaViolation, "density: value must be nonnegative");
    return [v](const Vec&) { return v; };
  }
  if (type == "affine") {
    double base = finite_number(j.value("base", Json(1.0)), "density: base");
    double coeff = finite_number(j.value("coeff", Json(0.0)), "density: coeff");
    require(j.contains("axis"), ErrorCode::SchemaViolation, "density: affine needs \"axis\"");
    Vec axis = unit_vector(vec_from_json(j["axis"], n, "density: axis"));
    return [base, coeff, axis](const Vec& u) { return base + coeff * axis.dot(u); };
  }
  if (type == "cells") {
    require(j.contains("resolution") && j["resolution"].is_number_integer() &&
                j.contains("values") && j["values"].is_array(),
            ErrorCode::SchemaViolation, "density: cells needs \"resolution\" and \"values\"");
    int res = j["resolution"].get<int>();
    require(res >= 3, ErrorCode::SchemaViolation, "density: resolution too small");
    std::vector<double> values;
    for (const auto& v : j["values"]) {
      double x = finite_number(v, "density: values");
      require(x >= 0.0, ErrorCode::SchemaViolation, "density: cell values must be nonnegative");
      values.push_back(x);
    }
    if (n == 2) {
      require(static_cast<int>(values.size()) == res, ErrorCode::SchemaViolation,
              "density: need exactly \"resolution\" cell values for n = 2");
      return [res, values](const Vec& u) {
        double a = std::atan2(u[1], u[0]);
        if (a < 0) a += 2.0 * M_PI;
        int cell = std::min(res - 1, static_cast<int>(a / (2.0 * M_PI) * res));
        return values[cell];
      };
    }
    require(n == 3, ErrorCode::SchemaViolation, "density: cells supports n = 2 or 3");
    int freq = 1;
    while (20 * freq * freq < res) ++freq;
    IcoMesh mesh = icosphere(freq);
    require(values.size() == mesh.faces.size(), ErrorCode::SchemaViolation,
            "density: need one value per icosphere cell (" + std::to_string(mesh.faces.size()) +
                " for resolution " + std::to_string(res) + ")");
    std::vector<Vec> centroids;
    for (const auto& f : mesh.faces) {
      centroids.push_back(
          unit_vector(Vec(mesh.vertices[f[0]] + mesh.vertices[f[1]] + mesh.vertices[f[2]])));
    }
    return [centroids, values](const Vec& u) {
      int best = 0;
      double bd = -2.0;
      for (size_t i = 0; i < centroids.size(); ++i) {
        double d = centroids[i].dot(u);
        if (d > bd) {
          bd = d;
          best = static_cast<int>(i);
        }
      }
      return values[best];
    };
  }
  fail(ErrorCode::SchemaViolation, "density: unknown type \"" + type + "\"");
}

ProblemSpec parse_problem(const Json& j) {
  require_schema(j, "problem");
  ProblemSpec ps;
  ps.dim = dim_field(j);
  ps.p = finite_number(j.value("p", Json(2.0)), "problem: p");
  ps.q = finite_number(j.value("q", Json(ps.dim)), "problem: q");

  if (j.contains("measure")) {
    ps.mu = measure_from_json(j["measure"]);
    require(ps.mu.dim() == ps.dim, ErrorCode::SchemaViolation,
            "problem: measure dimension differs from \"dim\"");
    ps.has_measure = true;
  }
  if (j.contains("density")) {
    require(!ps.has_measure, ErrorCode::SchemaViolation,
            "problem: give either \"measure\" or \"density\", not both");
    ps.density = density_from_json(j["density"], ps.dim);
    ps.has_density = true;
    if (j.contains("resolutions")) {
      require(j["resolutions"].is_array() && !j["resolutions"].empty(),
              ErrorCode::SchemaViolation, "problem: \"resolutions\" must be a nonempty array");
      int prev = 0;
      for (const auto& r : j["resolutions"]) {
        require(r.is_number_integer(), ErrorCode::SchemaViolation,
                "problem: resolutions must be integers");
        int v = r.get<int>();
        require(v > prev, ErrorCode::SchemaViolation, "problem: resolutions must increase");
        ps.resolutions.push_back(v);
        prev = v;
      }
    } else {
      ps.resolutions = {64};
    }
  }
  require(ps.has_measure || ps.has_density, ErrorCode::SchemaViolation,
          "problem: needs a \"measure\" or a \"density\"");

  ps.qdoc = j.contains("Q") ? j["Q"] : Json{{"type", "ball"}, {"radius", 1.0}};
  ps.Q = star_body_from_json(ps.qdoc, ps.dim);

  if (j.contains("options")) {
    const Json& o = j["options"];
    require(o.is_object(), ErrorCode::SchemaViolation, "problem: \"options\" must be an object");
    if (o.contains("max_iters")) ps.opts.max_iters = o["max_iters"].get<int>();
    if (o.contains("grad_tol")) ps.opts.grad_tol = finite_number(o["grad_tol"], "options: grad_tol");
    if (o.contains("residual_tol"))
      ps.opts.residual_tol = finite_number(o["residual_tol"], "options: residual_tol");
    if (o.contains("rtol")) ps.opts.quadrature_rtol = finite_number(o["rtol"], "options: rtol");
    if (o.contains("offset_floor"))
      ps.opts.offset_floor = finite_number(o["offset_floor"], "options: offset_floor");
    if (o.contains("seed")) ps.opts.seed = o["seed"].get<unsigned long long>();
    require(ps.opts.max_iters > 0 && ps.opts.grad_tol > 0 && ps.opts.grad_tol < 1 &&
                ps.opts.residual_tol > 0 && ps.opts.residual_tol < 1 &&
                ps.opts.quadrature_rtol > 0 && ps.opts.offset_floor > 0,
            ErrorCode::SchemaViolation, "problem: options out of range");
  }
  ps.input_sha = sha256_hex(canonical_dump(j));
  return ps;
}

namespace {

void canon(const Json& j, std::string& out) {
  switch (j.type()) {
    case Json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += Json(it.key()).dump();
        out += ':';
        canon(it.value(), out);
      }
      out += '}';
      break;
    }
    case Json::value_t::array: {
      out += '[';
      for (size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        canon(j[i], out);
      }
      out += ']';
      break;
    }
    case Json::value_t::string:
      out += j.dump();
      break;
    case Json::value_t::boolean:
      out += j.get<bool>() ? "true" : "false";
      break;
    case Json::value_t::number_integer:
      out += std::to_string(j.get<long long>());
      break;
    case Json::value_t::number_unsigned:
      out += std::to_string(j.get<unsigned long long>());
      break;
    case Json::value_t::number_float: {
      double d = j.get<double>();
      if (!std::isfinite(d)) {
        out += "null";
      } else {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", d);
        out += buf;
      }
      break;
    }
    default:
      out += "null";
      break;
  }
}

}  // namespace

std::string canonical_dump(const Json& j) {
  std::string out;
  canon(j, out);
  return out;
}

namespace {

struct Sha256 {
  std::uint32_t h[8] = {0x6a09e667u, 0xbb67ae85u, 0x3c6ef372u, 0xa54ff53au,
                        0x510e527fu, 0x9b05688cu, 0x1f83d9abu, 0x5be0cd19u};
  unsigned char buf[64];
  std::uint64_t len = 0;
  size_t fill = 0;

  static std::uint32_t rotr(std::uint32_t x, int r) { return (x >> r) | (x << (32 - r)); }

  void block(const unsigned char* p) {
    static const std::uint32_t K[64] = {
        0x428a2f98u, 0x71374491u, 0xb5c0fbcfu, 0xe9b5dba5u, 0x3956c25bu, 0x59f111f1u, 0x923f82a4u,
        0xab1c5ed5u, 0xd807aa98u, 0x12835b01u, 0x243185beu, 0x550c7dc3u, 0x72be5d74u, 0x80deb1feu,
        0x9bdc06a7u, 0xc19bf174u, 0xe49b69c1u, 0xefbe4786u, 0x0fc19dc6u, 0x240ca1ccu, 0x2de92c6fu,
        0x4a7484aau, 0x5cb0a9dcu, 0x76f988dau, 0x983e5152u, 0xa831c66du, 0xb00327c8u, 0xbf597fc7u,
        0xc6e00bf3u, 0xd5a79147u, 0x06ca6351u, 0x14292967u, 0x27b70a85u, 0x2e1b2138u, 0x4d2c6dfcu,
        0x53380d13u, 0x650a7354u, 0x766a0abbu, 0x81c2c92eu, 0x92722c85u, 0xa2bfe8a1u, 0xa81a664bu,
        0xc24b8b70u, 0xc76c51a3u, 0xd192e819u, 0xd6990624u, 0xf40e3585u, 0x106aa070u, 0x19a4c116u,
        0x1e376c08u, 0x2748774cu, 0x34b0bcb5u, 0x391c0cb3u, 0x4ed8aa4au, 0x5b9cca4fu, 0x682e6ff3u,
        0x748f82eeu, 0x78a5636fu, 0x84c87814u, 0x8cc70208u, 0x90befffau, 0xa4506cebu, 0xbef9a3f7u,
        0xc67178f2u};
    std::uint32_t w[64];
    for (int i = 0; i < 16; ++i) {
      w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
             (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
    }
    for (int i = 16; i < 64; ++i) {
      std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
      std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
      w[i] = w[i - 16] + s0 + w[i - 7] + s1;
    }
    std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4], f = h[5], g = h[6], hh = h[7];
    for (int i = 0; i < 64; ++i) {
      std::uint32_t S1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
      std::uint32_t ch = (e & f) ^ (~e & g);
      std::uint32_t t1 = hh + S1 + ch + K[i] + w[i];
      std::uint32_t S0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
      std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
      std::uint32_t t2 = S0 + maj;
      hh = g;
      g = f;
      f = e;
      e = d + t1;
      d = c;
      c = b;
      b = a;
      a = t1 + t2;
    }
    h[0] += a;
    h[1] += b;
    h[2] += c;
    h[3] += d;
    h[4] += e;
    h[5] += f;
    h[6] += g;
    h[7] += hh;
  }

  void update(const void* data, size_t n) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    len += n;
    while (n > 0) {
      size_t take = std::min(n, sizeof(buf) - fill);
      std::memcpy(buf + fill, p, take);
      fill += take;
      p += take;
      n -= take;
      if (fill == sizeof(buf)) {
        block(buf);
        fill = 0;
      }
    }
  }

  std::string hex() {
    std::uint64_t bits = len * 8;
    unsigned char pad = 0x80;
    update(&pad, 1);
    unsigned char zero = 0;
    while (fill != 56) update(&zero, 1);
    unsigned char lenb[8];
    for (int i = 0; i < 8; ++i) lenb[i] = static_cast<unsigned char>(bits >> (56 - 8 * i));
    update(lenb, 8);
    char out[65];
    for (int i = 0; i < 8; ++i) std::snprintf(out + 8 * i, 9, "%08x", h[i]);
    return std::string(out, 64);
  }
};

}  // namespace

std::string sha256_hex(const std::string& data) {
  Sha256 s;
  s.update(data.data(), data.size());
  return s.hex();
}

Json measure_result_to_json(const DualMeasureResult& m) {
  Json j;
  j["atoms_cq"] = m.atoms_cq;
  Json cpq = Json::array();
  for (double v : m.atoms_cpq) {
    if (std::isfinite(v)) {
      cpq.push_back(v);
    } else {
      cpq.push_back(nullptr);  // not applicable on zero-offset normals
    }
  }
  j["atoms_cpq"] = cpq;
  Json defined = Json::array();
  for (bool b : m.cpq_defined) defined.push_back(b);
  j["cpq_defined"] = defined;
  j["vq"] = m.vq;
  j["quadrature_error"] = m.quadrature_error;
  j["evals"] = m.evals;
  return j;
}

Json report_to_json(const SolveReport& rep) {
  Json j;
  switch (rep.status) {
    case SolveStatus::Converged:
      j["status"] = "converged";
      break;
    case SolveStatus::NotConverged:
      j["status"] = "not_converged";
      break;
    case SolveStatus::FacetCollapse:
      j["status"] = "facet_collapse";
      break;
  }
  j["iterations"] = rep.iterations;
  j["objective"] = rep.objective;
  j["tangential_residual"] = rep.tangential_residual;
  j["kkt_residual"] = rep.kkt_residual;
  j["lagrange_lambda"] = rep.lagrange_lambda;
  j["lambda0"] = rep.lambda0;
  j["final_rescale"] = rep.final_rescale;
  j["residuals"] = rep.residuals;
  j["max_residual"] = rep.max_residual;
  j["objective_trace"] = rep.objective_trace;
  j["warnings"] = rep.warnings;
  j["quadrature_evals"] = rep.quadrature_evals;
  Json o;
  o["interior"] = rep.origin.interior;
  o["inradius_from_origin"] = rep.origin.inradius_from_origin;
  o["zero_offset_normals"] = rep.origin.zero_offset_normals;
  o["xi_flagged"] = rep.origin.xi_flagged;
  j["origin"] = o;
  return j;
}

Json solution_to_json(const Solution& sol, double p, double q, bool normalized, const Json& qdoc,
                      const std::string& input_sha, const SolveOptions& opts) {
  Json j;
  j["schema"] = kSchemaTag;
  j["kind"] = "solution";
  j["tool_version"] = kToolVersion;
  j["input_sha256"] = input_sha;
  j["problem"] = Json{{"dim", sol.polytope.dim()}, {"p", p},    {"q", q},
                      {"normalized", normalized},  {"Q", qdoc}};
  j["seed"] = opts.seed;
  j["quadrature_rtol"] = opts.quadrature_rtol;
  Json poly = polytope_to_json(sol.polytope);
  poly.erase("schema");
  poly.erase("kind");
  j["polytope"] = poly;
  Json verts = Json::array();
  for (const Vec& v : sol.geometry.vertices) verts.push_back(vec_to_json(v));
  j["vertices"] = verts;
  j["measure"] = measure_result_to_json(sol.measure);
  j["report"] = report_to_json(sol.report);
  return j;
}

Json mc_to_json(const McMeasure& m, double q, long long samples, unsigned long long seed) {
  Json j;
  j["schema"] = kSchemaTag;
  j["kind"] = "oracle";
  j["q"] = q;
  j["samples"] = samples;
  j["seed"] = seed;
  j["vq"] = Json{{"value", m.vq.value}, {"stderr", m.vq.stderr_est}};
  Json atoms = Json::array();
  for (const McEstimate& e : m.atoms) {
    atoms.push_back(Json{{"value", e.value}, {"stderr", e.stderr_est}});
  }
  j["atoms"] = atoms;
  return j;
}

Json density_result_to_json(const DensityResult& dr, double p, double q, const Json& qdoc,
                            const std::string& input_sha, const SolveOptions& opts) {
  Json j;
  j["schema"] = kSchemaTag;
  j["kind"] = "density_solution";
  j["tool_version"] = kToolVersion;
  j["input_sha256"] = input_sha;
  j["p"] = p;
  j["q"] = q;
  j["Q"] = qdoc;
  Json stages = Json::array();
  for (const DensityStage& st : dr.stages) {
    Json s;
    s["resolution"] = st.resolution;
    s["distance_to_next"] = st.distance_to_next;
    s["ma_residual_max"] = std::isfinite(st.ma_residual_max) ? Json(st.ma_residual_max) : Json();
    s["ma_residual_mean"] = std::isfinite(st.ma_residual_mean) ? Json(st.ma_residual_mean) : Json();
    s["runtime_seconds"] = st.runtime_seconds;
    s["solution"] = solution_to_json(st.solution, p, q, false, qdoc, input_sha, opts);
    stages.push_back(s);
  }
  j["stages"] = stages;
  return j;
}

namespace {

struct SvgMapper {
  double xmin, ymin, scale, height;
  double x(double wx) const { return (wx - xmin) * scale + 20.0; }
  double y(double wy) const { return height - ((wy - ymin) * scale + 20.0); }
};

void svg_num(std::ostringstream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  os << buf;
}

}  // namespace

std::string render_svg(const VPolytope& V, const HPolytope& P, const std::vector<double>& atoms) {
  require(V.n == 2, ErrorCode::BadArgument, "SVG rendering is 2-D only");
  // Polygon cycle: angular order around the interior point.
  std::vector<int> order(V.vertices.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  const Vec c = V.interior_point;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const Vec va = V.vertices[a] - c, vb = V.vertices[b] - c;
    return std::atan2(va[1], va[0]) < std::atan2(vb[1], vb[0]);
  });

  double amax = 0.0;
  for (double a : atoms) amax = std::max(amax, a);
  double body = 0.0;
  for (const Vec& v : V.vertices) body = std::max(body, v.norm());
  double arrow = 0.45 * body;

  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  auto grow = [&](double x, double y) {
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  };
  for (const Vec& v : V.vertices) grow(v[0], v[1]);
  for (size_t i = 0; i < P.size(); ++i) {
    int fi = V.facet_of_normal[i];
    if (fi < 0 || amax <= 0) continue;
    Vec tip = V.facets[fi].centroid + (arrow * atoms[i] / amax) * P.normals[i];
    grow(tip[0], tip[1]);
  }

  double w = xmax - xmin, h = ymax - ymin;
  double scale = 600.0 / std::max({w, h, 1e-9});
  SvgMapper m{xmin, ymin, scale, h * scale + 40.0};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << (w * scale + 40.0) << "\" height=\""
     << m.height << "\" viewBox=\"0 0 " << (w * scale + 40.0) << " " << m.height << "\">\n";
  os << "  <polygon points=\"";
  for (size_t i = 0; i < order.size(); ++i) {
    const Vec& v = V.vertices[order[i]];
    if (i) os << ' ';
    svg_num(os, m.x(v[0]));
    os << ',';
    svg_num(os, m.y(v[1]));
  }
  os << "\" fill=\"#dbeafe\" stroke=\"#1e3a8a\" stroke-width=\"1.5\"/>\n";
  for (size_t i = 0; i < P.size(); ++i) {
    int fi = V.facet_of_normal[i];
    if (fi < 0 || amax <= 0 || atoms[i] <= 0) continue;
    const Vec& base = V.facets[fi].centroid;
    Vec tip = base + (arrow * atoms[i] / amax) * P.normals[i];
    os << "  <line x1=\"";
    svg_num(os, m.x(base[0]));
    os << "\" y1=\"";
    svg_num(os, m.y(base[1]));
    os << "\" x2=\"";
    svg_num(os, m.x(tip[0]));
    os << "\" y2=\"";
    svg_num(os, m.y(tip[1]));
    os << "\" stroke=\"#b91c1c\" stroke-width=\"2\"/>\n  <circle cx=\"";
    svg_num(os, m.x(tip[0]));
    os << "\" cy=\"";
    svg_num(os, m.y(tip[1]));
    os << "\" r=\"3\" fill=\"#b91c1c\"/>\n";
  }
  os << "  <circle cx=\"";
  svg_num(os, m.x(0.0));
  os << "\" cy=\"";
  svg_num(os, m.y(0.0));
  os << "\" r=\"4\" fill=\"#111827\"/>\n</svg>\n";
  return os.str();
}

std::string render_off(const VPolytope& V) {
  require(V.n == 3, ErrorCode::BadArgument, "OFF rendering is 3-D only");
  std::ostringstream os;
  os << "OFF\n" << V.vertices.size() << ' ' << V.facets.size() << " 0\n";
  for (const Vec& v : V.vertices) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", v[0], v[1], v[2]);
    os << buf;
  }
  for (const FacetGeometry& fg : V.facets) {
    // Counterclockwise cycle seen from outside: angular sort in a plane basis
    // (b1, b2) with b1 x b2 = outward normal.
    Eigen::Vector3d e1 = Eigen::Vector3d::Zero(), e2 = Eigen::Vector3d::Zero();
    const Vec& a = V.vertices[fg.vertex_ids[0]];
    for (size_t i = 1; i < fg.vertex_ids.size() && e2.norm() < 1e-12; ++i) {
      Eigen::Vector3d d = V.vertices[fg.vertex_ids[i]] - a;
      if (e1.norm() < 1e-12) {
        e1 = d;
      } else {
        e2 = e1.cross(d);
      }
    }
    Vec normal = Vec(e2.normalized());
    if (normal.dot(fg.centroid - V.interior_point) < 0) normal = -normal;
    Vec b1 = V.vertices[fg.vertex_ids[0]] - fg.centroid;
    b1 -= normal * normal.dot(b1);
    b1 = unit_vector(b1);
    Eigen::Vector3d n3 = normal, b13 = b1;
    Vec b2 = n3.cross(b13);
    std::vector<int> cycle = fg.vertex_ids;
    std::sort(cycle.begin(), cycle.end(), [&](int a, int b) {
      Vec da = V.vertices[a] - fg.centroid, db = V.vertices[b] - fg.centroid;
      return std::atan2(b2.dot(da), b1.dot(da)) < std::atan2(b2.dot(db), b1.dot(db));
    });
    os << cycle.size();
    for (int id : cycle) os << ' ' << id;
    os << '\n';
  }
  return os.str();
}

}  // namespace dmk
