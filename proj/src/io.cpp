#include "spectra/core/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "spectra/core/errors.hpp"

#ifndef SPECTRA_VERSION_STRING
#define SPECTRA_VERSION_STRING "0.0.0"
#endif

namespace spectra {

const char* library_version() noexcept { return SPECTRA_VERSION_STRING; }

namespace {

bool is_scalar(const Json& j) { return !j.is_object() && !j.is_array(); }

void dump_scalar(const Json& j, std::string& out) {
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
      out += "null";
      return;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    out += buf;
  } else {
    out += j.dump();
  }
}

void dump_rec(const Json& j, std::string& out, int indent) {
  if (is_scalar(j)) {
    dump_scalar(j, out);
    return;
  }
  if (j.is_array()) {
    bool flat = true;
    for (const auto& e : j)
      if (!is_scalar(e)) flat = false;
    if (flat || j.empty()) {
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += ',';
        first = false;
        dump_scalar(e, out);
      }
      out += ']';
      return;
    }
    out += "[\n";
    bool first = true;
    for (const auto& e : j) {
      if (!first) out += ",\n";
      first = false;
      out.append(static_cast<std::size_t>(indent + 1) * 2, ' ');
      dump_rec(e, out, indent + 1);
    }
    out += '\n';
    out.append(static_cast<std::size_t>(indent) * 2, ' ');
    out += ']';
    return;
  }
  if (j.empty()) {
    out += "{}";
    return;
  }
  out += "{\n";
  bool first = true;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!first) out += ",\n";
    first = false;
    out.append(static_cast<std::size_t>(indent + 1) * 2, ' ');
    out += Json(it.key()).dump();
    out += ": ";
    dump_rec(it.value(), out, indent + 1);
  }
  out += '\n';
  out.append(static_cast<std::size_t>(indent) * 2, ' ');
  out += '}';
}

[[noreturn]] void parse_fail(const std::string& what) { fail(ErrorCode::Parse, "instance file: " + what); }

const Json& field(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) parse_fail(std::string("missing field '") + key + "'");
  return *it;
}

SymMatrix json_sym(const Json& j, Index n, const char* what) {
  Vector v = json_vector(j);
  if (v.size() != tri(n)) fail(ErrorCode::DimensionMismatch, std::string("instance file: ") + what + " has wrong svec length");
  return SymMatrix::from_svec(v);
}

}  // namespace

std::string dump_json(const Json& j) {
  std::string out;
  dump_rec(j, out, 0);
  out += '\n';
  return out;
}

Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json matrix_json(const Matrix& m) {
  Json a = Json::array();
  for (Index i = 0; i < m.rows(); ++i) a.push_back(vector_json(m.row(i).transpose()));
  return a;
}

Vector json_vector(const Json& j) {
  if (!j.is_array()) parse_fail("expected an array of numbers");
  Vector v(static_cast<Index>(j.size()));
  Index k = 0;
  for (const auto& e : j) {
    if (!e.is_number()) parse_fail("expected a number");
    v(k++) = e.get<double>();
  }
  return v;
}

Matrix json_matrix(const Json& j) {
  if (!j.is_array()) parse_fail("expected an array of rows");
  const Index rows = static_cast<Index>(j.size());
  if (rows == 0) return Matrix(0, 0);
  const Index cols = static_cast<Index>(j.at(0).size());
  Matrix m(rows, cols);
  Index i = 0;
  for (const auto& r : j) {
    Vector v = json_vector(r);
    if (v.size() != cols) parse_fail("ragged matrix");
    m.row(i++) = v.transpose();
  }
  return m;
}

Json instance_to_json(const BapInstance& inst) {
  Json j;
  j["n"] = inst.n();
  j["m"] = inst.m();
  j["b"] = vector_json(inst.b);
  j["W"] = vector_json(inst.W.svec());
  j["A"] = matrix_json(inst.map.rows());
  if (inst.map.m() == 0) j["A"] = Json::array();
  Json meta;
  const InstanceMeta& md = inst.meta;
  meta["family"] = md.family;
  meta["seed"] = md.seed;
  meta["params"] = md.params;
  if (md.feasible_point) meta["feasible_point"] = vector_json(md.feasible_point->svec());
  if (!md.certificates.empty()) {
    Json c = Json::array();
    for (const auto& v : md.certificates) c.push_back(vector_json(v));
    meta["certificates"] = c;
  }
  if (md.face_basis) meta["face_basis"] = matrix_json(*md.face_basis);
  if (md.optimal) {
    Json o;
    o["X"] = vector_json(md.optimal->X.svec());
    o["y"] = vector_json(md.optimal->y);
    o["Z"] = vector_json(md.optimal->Z.svec());
    meta["optimal"] = o;
  }
  if (md.optimal_value) meta["optimal_value"] = *md.optimal_value;
  if (!md.notes.empty()) meta["notes"] = md.notes;
  j["meta"] = meta;
  return j;
}

BapInstance instance_from_json(const Json& j) {
  if (!j.is_object()) parse_fail("top level must be an object");
  const Json& jn = field(j, "n");
  const Json& jm = field(j, "m");
  if (!jn.is_number_integer() || !jm.is_number_integer()) parse_fail("'n' and 'm' must be integers");
  const Index n = jn.get<Index>();
  const Index m = jm.get<Index>();
  if (n < 1 || m < 0) parse_fail("'n' must be positive and 'm' nonnegative");
  Vector b = json_vector(field(j, "b"));
  if (b.size() != m) fail(ErrorCode::DimensionMismatch, "instance file: b has length != m");
  SymMatrix W = json_sym(field(j, "W"), n, "W");
  const Json& ja = field(j, "A");
  Matrix rows(m, tri(n));
  if (!ja.is_array() || static_cast<Index>(ja.size()) != m)
    fail(ErrorCode::DimensionMismatch, "instance file: A must have m rows");
  Index i = 0;
  for (const auto& r : ja) {
    Vector v = json_vector(r);
    if (v.size() != tri(n)) fail(ErrorCode::DimensionMismatch, "instance file: A row has wrong svec length");
    rows.row(i++) = v.transpose();
  }
  BapInstance inst{LinearMap(n, std::move(rows)), std::move(b), std::move(W), {}};
  auto it = j.find("meta");
  if (it != j.end() && it->is_object()) {
    const Json& meta = *it;
    InstanceMeta& md = inst.meta;
    if (auto f = meta.find("family"); f != meta.end() && f->is_string()) md.family = f->get<std::string>();
    if (auto f = meta.find("seed"); f != meta.end() && f->is_number_integer()) md.seed = f->get<std::uint64_t>();
    if (auto f = meta.find("params"); f != meta.end()) md.params = *f;
    if (auto f = meta.find("feasible_point"); f != meta.end()) md.feasible_point = json_sym(*f, n, "feasible_point");
    if (auto f = meta.find("certificates"); f != meta.end())
      for (const auto& c : *f) md.certificates.push_back(json_vector(c));
    if (auto f = meta.find("face_basis"); f != meta.end()) md.face_basis = json_matrix(*f);
    if (auto f = meta.find("optimal"); f != meta.end())
      md.optimal = KktTriple{json_sym(field(*f, "X"), n, "optimal.X"), json_vector(field(*f, "y")),
                             json_sym(field(*f, "Z"), n, "optimal.Z")};
    if (auto f = meta.find("optimal_value"); f != meta.end() && f->is_number()) md.optimal_value = f->get<double>();
    if (auto f = meta.find("notes"); f != meta.end()) md.notes = *f;
  }
  inst.validate();
  return inst;
}

std::string instance_to_string(const BapInstance& inst) { return dump_json(instance_to_json(inst)); }

BapInstance instance_from_string(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    parse_fail(e.what());
  }
  return instance_from_json(j);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open '" + path + "' for writing");
  out << content;
  if (!out) fail(ErrorCode::Io, "write to '" + path + "' failed");
}

BapInstance load_instance(const std::string& path) { return instance_from_string(read_text_file(path)); }

void save_instance(const BapInstance& inst, const std::string& path) { write_text_file(path, instance_to_string(inst)); }

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fnv1a64_hex(const std::string& bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

}  // namespace spectra
