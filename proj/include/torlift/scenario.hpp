#pragma once

// Scenario files: a sectioned key-value text format describing a local
// torus action (nerve, cocycle, representation, samples) and optional
// lifting data for a principal Z/m'^k-bundle over it.
//
//   [scenario]        version, name, rank, fiber_rank, torus_order,
//                     fiber_order, window, threshold, good_cover, basepoint
//   [nerve]           vertices = a b c / edge = a b / triangle = a b c
//   [cocycle]         g a b = [[1,0],[-1,1]]
//   [representation]  group = free a / image a = [[..]] / transition a b = word
//   [samples]         sample chart label = r2_1 r2_2 ...
//   [overlaps]        pair a b = label_a label_b
//   [lifting]         hom chart label|* = u1 + u2 ; ... / twist = u2
//   [gluing]          glue a b label_b|* = 1/8 - th1 ; ...
//
// Sections appear in this order; unknown sections and keys are errors.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "torlift/atlas.hpp"
#include "torlift/cech.hpp"
#include "torlift/group.hpp"
#include "torlift/lifting.hpp"
#include "torlift/torus.hpp"

namespace torlift {

/// constant + sum_i coef[i] * var_i, angles in R/Z.
struct AffineExpr {
  Rational constant{0};
  std::vector<std::int64_t> coef;
  friend bool operator==(const AffineExpr&, const AffineExpr&) = default;
};

struct RepresentationSpec {
  FPGroup group;
  std::vector<TorusAut> images;
  std::vector<std::pair<OrientedEdge, GroupWord>> transitions;
  friend bool operator==(const RepresentationSpec&, const RepresentationSpec&) = default;
};

struct HomDecl {
  std::size_t chart = 0;
  std::optional<std::size_t> sample;  // nullopt: every sample of the chart
  std::vector<AffineExpr> value;
  friend bool operator==(const HomDecl&, const HomDecl&) = default;
};

struct GlueDecl {
  std::size_t a = 0, b = 0;
  std::optional<std::size_t> sample;  // b-side sample
  std::vector<AffineExpr> value;
  friend bool operator==(const GlueDecl&, const GlueDecl&) = default;
};

struct LiftingSpec {
  std::vector<HomDecl> homs;
  std::optional<std::vector<AffineExpr>> twist;
  friend bool operator==(const LiftingSpec&, const LiftingSpec&) = default;
};

struct Scenario {
  int version = 1;
  std::string name;
  std::size_t rank = 0;
  std::size_t fiber_rank = 1;
  std::int64_t torus_order = 0;
  std::int64_t fiber_order = 0;
  std::int64_t window = 1;
  Rational threshold{1, 4};
  bool good_cover = false;
  std::optional<std::string> basepoint;
  Nerve nerve;
  GLCocycle cocycle;
  std::optional<RepresentationSpec> representation;
  std::vector<std::vector<ChartSample>> samples;
  std::vector<OverlapDecl> overlaps;
  std::optional<LiftingSpec> lifting;
  std::vector<GlueDecl> gluing;
};

struct ParseOptions {
  std::int64_t max_denominator = 1000000;
};

namespace detail {

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

inline std::string affine_str(const AffineExpr& e, const std::string& var) {
  std::string s;
  for (std::size_t i = 0; i < e.coef.size(); ++i) {
    auto c = e.coef[i];
    if (c == 0) continue;
    std::string term = (std::abs(c) == 1 ? "" : std::to_string(std::abs(c)) + "*") + var + std::to_string(i + 1);
    s += s.empty() ? (c < 0 ? "-" + term : term) : (c < 0 ? " - " : " + ") + term;
  }
  if (e.constant != 0 || s.empty()) {
    auto r = e.constant;
    if (s.empty()) {
      s = to_string(r);
    } else {
      s += (r < 0 ? " - " : " + ") + to_string(r < 0 ? -r : r);
    }
  }
  return s;
}

inline std::string affine_list_str(const std::vector<AffineExpr>& v, const std::string& var) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " ; " : "") + affine_str(v[i], var);
  return s;
}

// One component: terms separated by + and -, each an angle p/q, an integer
// or [c*]var<i>.
inline AffineExpr parse_affine(std::string_view text, const std::string& var, std::size_t n,
                               std::int64_t max_den) {
  std::string t;
  for (char ch : text) {
    if (ch != ' ' && ch != '\t') t += ch;
  }
  if (t.empty()) throw InputError("empty expression");
  AffineExpr e;
  e.coef.assign(n, 0);
  std::size_t i = 0;
  while (i < t.size()) {
    std::int64_t sign = 1;
    if (t[i] == '+' || t[i] == '-') {
      sign = t[i] == '-' ? -1 : 1;
      ++i;
    } else if (i != 0) {
      throw InputError("expected + or - in '" + t + "'");
    }
    std::size_t j = i;
    while (j < t.size() && t[j] != '+' && t[j] != '-') ++j;
    std::string term = t.substr(i, j - i);
    i = j;
    if (term.empty()) throw InputError("missing term in '" + t + "'");
    auto star = term.find('*');
    std::string num = "1", sym = term;
    if (star != std::string::npos) {
      num = term.substr(0, star);
      sym = term.substr(star + 1);
    } else if (std::isdigit(static_cast<unsigned char>(term[0]))) {
      auto k = term.find_first_not_of("0123456789/");
      if (k == std::string::npos) {
        Rational r = parse_rational(term);
        if (r.denominator() > max_den) throw InputError("denominator of " + term + " exceeds the limit");
        e.constant += Rational(sign) * r;
        continue;
      }
      num = term.substr(0, k);
      sym = term.substr(k);
    }
    if (sym.rfind(var, 0) != 0 || sym.size() == var.size()) {
      throw InputError("unknown symbol '" + sym + "' (expected " + var + "1.." + var + std::to_string(n) + ")");
    }
    auto idx = parse_int(sym.substr(var.size()));
    if (idx < 1 || static_cast<std::size_t>(idx) > n) {
      throw InputError("variable " + sym + " out of range 1.." + std::to_string(n));
    }
    e.coef[static_cast<std::size_t>(idx - 1)] += sign * parse_int(num);
  }
  e.constant = Rational(e.constant.numerator() % e.constant.denominator(), e.constant.denominator());
  if (e.constant < 0) e.constant += 1;
  return e;
}

inline std::vector<AffineExpr> parse_affine_list(std::string_view text, const std::string& var, std::size_t n,
                                                 std::size_t k, std::int64_t max_den) {
  std::vector<AffineExpr> out;
  std::size_t pos = 0;
  while (true) {
    auto semi = text.find(';', pos);
    out.push_back(parse_affine(text.substr(pos, semi == std::string_view::npos ? semi : semi - pos), var, n, max_den));
    if (semi == std::string_view::npos) break;
    pos = semi + 1;
  }
  if (out.size() != k) {
    throw InputError("expected " + std::to_string(k) + " component(s) separated by ';', got " +
                     std::to_string(out.size()));
  }
  return out;
}

inline TorusAut parse_matrix(std::string_view text, std::size_t rank) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    throw InputError("malformed matrix '" + std::string(trim(text)) + "' (expected [[..],..])");
  }
  if (!j.is_array()) throw InputError("matrix must be an array of rows");
  std::vector<std::vector<std::int64_t>> rows;
  for (const auto& r : j) {
    if (!r.is_array()) throw InputError("matrix row must be an array");
    std::vector<std::int64_t> row;
    for (const auto& v : r) {
      if (!v.is_number_integer()) throw InputError("matrix entries must be integers");
      row.push_back(v.get<std::int64_t>());
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() != rank) {
    throw DimensionError("matrix has " + std::to_string(rows.size()) + " rows but rank is " + std::to_string(rank));
  }
  return TorusAut::from_rows(rows);
}

inline FPGroup parse_group(std::string_view text) {
  auto tok = split_ws(text);
  if (tok.empty()) throw InputError("empty group description");
  std::vector<std::string> names(tok.begin() + 1, tok.end());
  if (tok[0] == "trivial") {
    if (!names.empty()) throw InputError("trivial group takes no generators");
    return FPGroup::trivial();
  }
  if (tok[0] == "free") return FPGroup::free(names);
  if (tok[0] == "free_abelian") return FPGroup::free_abelian(names);
  if (tok[0] == "cyclic") {
    if (tok.size() != 3) throw InputError("expected 'cyclic <order> <name>'");
    return FPGroup::cyclic(parse_int(tok[1]), tok[2]);
  }
  throw InputError("unknown group family '" + tok[0] + "'");
}

inline std::string group_str(const FPGroup& g) {
  std::string s = family_name(g.family());
  if (g.family() == GroupFamily::cyclic) s += " " + std::to_string(g.order());
  for (const auto& n : g.generator_names()) s += " " + n;
  return s;
}

inline bool parse_bool(const std::string& v) {
  if (v == "true" || v == "yes") return true;
  if (v == "false" || v == "no") return false;
  throw InputError("expected true or false, got '" + v + "'");
}

class ScenarioParser {
 public:
  explicit ScenarioParser(ParseOptions opt) : opt_(opt) {}

  Scenario parse(std::string_view text) {
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      auto nl = text.find('\n', pos);
      std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
      ++lineno;
      auto hash = raw.find('#');
      std::string_view line = trim(raw.substr(0, hash));
      if (line.empty()) continue;
      try {
        handle(line);
      } catch (const Error& e) {
        throw InputError("line " + std::to_string(lineno) + ": " + e.what());
      }
    }
    try {
      finish();
    } catch (const Error& e) {
      throw InputError(std::string("end of file: ") + e.what());
    }
    return std::move(s_);
  }

 private:
  static inline const std::vector<std::string> kSections = {"scenario", "nerve", "cocycle", "representation",
                                                            "samples", "overlaps", "lifting", "gluing"};

  void handle(std::string_view line) {
    if (line.front() == '[') {
      if (line.back() != ']') throw InputError("malformed section header");
      std::string name(trim(line.substr(1, line.size() - 2)));
      auto it = std::find(kSections.begin(), kSections.end(), name);
      if (it == kSections.end()) throw InputError("unknown section [" + name + "]");
      auto idx = static_cast<int>(it - kSections.begin());
      if (idx <= section_) throw InputError("section [" + name + "] is repeated or out of order");
      advance(idx);
      if (idx == 6) s_.lifting.emplace();
      return;
    }
    if (section_ < 0) throw InputError("key outside of any section");
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw InputError("expected 'key = value'");
    auto lhs = split_ws(line.substr(0, eq));
    std::string value(trim(line.substr(eq + 1)));
    if (lhs.empty()) throw InputError("missing key");
    const std::string key = lhs[0];
    std::vector<std::string> args(lhs.begin() + 1, lhs.end());
    switch (section_) {
      case 0: scenario_key(key, args, value); break;
      case 1: nerve_key(key, args, value); break;
      case 2: cocycle_key(key, args, value); break;
      case 3: rep_key(key, args, value); break;
      case 4: samples_key(key, args, value); break;
      case 5: overlap_key(key, args, value); break;
      case 6: lifting_key(key, args, value); break;
      case 7: gluing_key(key, args, value); break;
    }
  }

  static void arity(const std::string& key, const std::vector<std::string>& args, std::size_t n) {
    if (args.size() != n) {
      throw InputError("key '" + key + "' takes " + std::to_string(n) + " argument(s), got " +
                       std::to_string(args.size()));
    }
  }

  Rational rational(const std::string& v) const {
    Rational r = parse_rational(v);
    if (r.denominator() > opt_.max_denominator) throw InputError("denominator of " + v + " exceeds the limit");
    return r;
  }

  void once(const std::string& key) {
    if (!seen_.insert(std::to_string(section_) + ":" + key).second) throw InputError("duplicate key '" + key + "'");
  }

  void scenario_key(const std::string& key, const std::vector<std::string>& args, const std::string& v) {
    arity(key, args, 0);
    once(key);
    if (key == "version") {
      s_.version = static_cast<int>(parse_int(v));
      if (s_.version != 1) throw InputError("unsupported scenario version " + v + " (expected 1)");
    } else if (key == "name") {
      s_.name = v;
    } else if (key == "rank") {
      auto r = parse_int(v);
      if (r < 1) throw InputError("rank must be >= 1");
      s_.rank = static_cast<std::size_t>(r);
    } else if (key == "fiber_rank") {
      auto r = parse_int(v);
      if (r < 1) throw InputError("fiber_rank must be >= 1");
      s_.fiber_rank = static_cast<std::size_t>(r);
    } else if (key == "torus_order") {
      s_.torus_order = parse_int(v);
      if (s_.torus_order < 1) throw InputError("torus_order must be >= 1");
    } else if (key == "fiber_order") {
      s_.fiber_order = parse_int(v);
      if (s_.fiber_order < 2) throw InputError("fiber_order must be >= 2");
    } else if (key == "window") {
      s_.window = parse_int(v);
      if (s_.window < 0) throw InputError("window must be >= 0");
    } else if (key == "threshold") {
      s_.threshold = rational(v);
      if (s_.threshold < 0 || s_.threshold > 1) throw InputError("threshold must lie in [0,1]");
    } else if (key == "good_cover") {
      s_.good_cover = parse_bool(v);
    } else if (key == "basepoint") {
      basepoint_ = v;
    } else {
      throw InputError("unknown key '" + key + "' in [scenario]");
    }
  }

  void samples_key(const std::string& key, const std::vector<std::string>& args, const std::string& v) {
    if (key != "sample") throw InputError("unknown key '" + key + "' in [samples]");
    arity(key, args, 2);
    auto c = s_.nerve.index_of(args[0]);
    ChartSample cs{args[1], {}};
    for (const auto& t : split_ws(v)) cs.r2.push_back(rational(t));
    if (cs.r2.size() != s_.rank) throw DimensionError("sample needs " + std::to_string(s_.rank) + " values of |z_i|^2");
    for (const auto& r : cs.r2) {
      if (r < 0) throw InvariantError("|z_i|^2 must be nonnegative");
    }
    for (const auto& o : s_.samples[c]) {
      if (o.label == cs.label) throw InvariantError("duplicate sample " + args[0] + ":" + cs.label);
    }
    s_.samples[c].push_back(std::move(cs));
  }

  void nerve_key(const std::string& key, const std::vector<std::string>& args, const std::string& v) {
    if (key == "vertices") {
      arity(key, args, 0);
      once(key);
      vertices_ = split_ws(v);
      if (vertices_.empty()) throw InputError("nerve needs at least one vertex");
    } else if (key == "edge") {
      arity(key, args, 0);
      auto t = split_ws(v);
      if (t.size() != 2) throw InputError("edge needs two vertices");
      edges_.emplace_back(vertex(t[0]), vertex(t[1]));
    } else if (key == "triangle") {
      arity(key, args, 0);
      auto t = split_ws(v);
      if (t.size() != 3) throw InputError("triangle needs three vertices");
      triangles_.push_back({vertex(t[0]), vertex(t[1]), vertex(t[2])});
    } else {
      throw InputError("unknown key '" + key + "' in [nerve]");
    }
  }

  std::size_t vertex(const std::string& name) const {
    auto it = std::find(vertices_.begin(), vertices_.end(), name);
    if (it == vertices_.end()) throw InputError("unknown vertex '" + name + "'");
    return static_cast<std::size_t>(it - vertices_.begin());
  }

  void cocycle_key(const std::string& key, const std::vector<std::string>& args, const std::string& v) {
    if (key != "g") throw InputError("unknown key '" + key + "' in [cocycle]");
    arity(key, args, 2);
    auto a = s_.nerve.index_of(args[0]), b = s_.nerve.index_of(args[1]);
    if (!s_.nerve.has_edge(a, b)) throw InputError("cocycle value on " + args[0] + "-" + args[1] + ", not an edge");
    if (!g_.emplace(OrientedEdge{a, b}, parse_matrix(v, s_.rank)).second) {
      throw InputError("duplicate cocycle value on " + args[0] + "-" + args[1]);
    }
  }

  void rep_key(const std::string& key, const std::vector<std::string>& args, const std::string& v) {
    if (key == "group") {
      arity(key, args, 0);
      once(key);
      rep_ = RepresentationSpec{parse_group(v), {}, {}};
      images_.assign(rep_->group.rank(), std::nullopt);
      return;
    }
    if (!rep_) throw InputError("'group' must come first in [representation]");
    if (key == "image") {
      arity(key, args, 1);
      const auto& names = rep_->group.generator_names();
      auto it = std::find(names.begin(), names.end(), args[0]);
      if (it == names.end()) throw InputError("unknown generator '" + args[0] + "'");
      auto& slot = images_[static_cast<std::size_t>(it - names.begin())];
      if (slot) throw InputError("duplicate image for " + args[0]);
      slot = parse_matrix(v, s_.rank);
    } else if (key == "transition") {
      arity(key, args, 2);
      auto a = s_.nerve.index_of(args[0]), b = s_.nerve.index_of(args[1]);
      if (!s_.nerve.has_edge(a, b)) throw InputError("transition on " + args[0] + "-" + args[1] + ", not an edge");
      rep_->transitions.emplace_back(OrientedEdge{a, b}, rep_->group.parse(v));
    } else {
      throw InputError("unknown key '" + key + "' in [representation]");
    }
  }

  std::size_t sample(std::size_t chart, const std::string& label) const {
    const auto& ss = s_.samples[chart];
    for (std::size_t i = 0; i < ss.size(); ++i) {
      if (ss[i].label == label) return i;
    }
    throw InputError("chart " + s_.nerve.vertices()[chart] + " has no sample '" + label + "'");
  }

  void overlap_key(const std::string& key, const std::vector<std::string>& args, const std::string& v) {
    if (key != "pair") throw InputError("unknown key '" + key + "' in [overlaps]");
    arity(key, args, 2);
    auto a = s_.nerve.index_of(args[0]), b = s_.nerve.index_of(args[1]);
    auto t = split_ws(v);
    if (t.size() != 2) throw InputError("pair needs two sample labels");
    auto it = std::find_if(s_.overlaps.begin(), s_.overlaps.end(),
                           [&](const OverlapDecl& o) { return o.a == a && o.b == b; });
    if (it == s_.overlaps.end()) {
      if (std::any_of(s_.overlaps.begin(), s_.overlaps.end(), [&](const OverlapDecl& o) { return o.a == b && o.b == a; })) {
        throw InputError("overlap " + args[0] + "-" + args[1] + " already declared in the other orientation");
      }
      s_.overlaps.push_back({a, b, {}});
      it = s_.overlaps.end() - 1;
    }
    it->pairs.emplace_back(sample(a, t[0]), sample(b, t[1]));
  }

  std::optional<std::size_t> sample_or_all(std::size_t chart, const std::string& label) const {
    if (label == "*") return std::nullopt;
    return sample(chart, label);
  }

  void lifting_key(const std::string& key, const std::vector<std::string>& args, const std::string& v) {
    auto& L = *s_.lifting;
    if (key == "hom") {
      arity(key, args, 2);
      auto c = s_.nerve.index_of(args[0]);
      HomDecl h{c, sample_or_all(c, args[1]), parse_affine_list(v, "u", s_.rank, s_.fiber_rank, opt_.max_denominator)};
      for (const auto& e : h.value) {
        if (e.constant != 0) throw InputError("a lifting cocycle has no constant term");
      }
      for (const auto& o : L.homs) {
        if (o.chart == h.chart && o.sample == h.sample) throw InputError("duplicate hom for " + args[0] + " " + args[1]);
      }
      L.homs.push_back(std::move(h));
    } else if (key == "twist") {
      arity(key, args, 0);
      once(key);
      L.twist = parse_affine_list(v, "u", s_.rank, s_.fiber_rank, opt_.max_denominator);
      for (const auto& e : *L.twist) {
        if (e.constant != 0) throw InputError("a twist has no constant term");
      }
    } else {
      throw InputError("unknown key '" + key + "' in [lifting]");
    }
  }

  void gluing_key(const std::string& key, const std::vector<std::string>& args, const std::string& v) {
    if (key != "glue") throw InputError("unknown key '" + key + "' in [gluing]");
    arity(key, args, 3);
    auto a = s_.nerve.index_of(args[0]), b = s_.nerve.index_of(args[1]);
    if (!s_.nerve.has_edge(a, b)) throw InputError("gluing on " + args[0] + "-" + args[1] + ", not an edge");
    GlueDecl g{a, b, sample_or_all(b, args[2]),
               parse_affine_list(v, "th", s_.rank, s_.fiber_rank, opt_.max_denominator)};
    for (const auto& o : s_.gluing) {
      if (o.a == g.a && o.b == g.b && o.sample == g.sample) throw InputError("duplicate glue for " + args[0] + " " + args[1] + " " + args[2]);
    }
    s_.gluing.push_back(std::move(g));
  }

  // Closes the current section and every skipped one up to `idx`.
  void advance(int idx) {
    for (int k = std::max(section_, 0); k < idx; ++k) {
      if (k >= section_) finalize(k, k == section_);
    }
    section_ = idx;
  }

  void finalize(int k, bool present) {
    switch (k) {
      case 0:
        if (!present) throw InputError("missing [scenario] section");
        if (!seen_.count("0:version")) throw InputError("[scenario] needs 'version'");
        if (s_.rank == 0) throw InputError("[scenario] needs 'rank'");
        if (s_.torus_order == 0) throw InputError("[scenario] needs 'torus_order'");
        if (s_.fiber_order == 0) s_.fiber_order = std::max<std::int64_t>(2, s_.torus_order);
        break;
      case 1:
        if (!present || vertices_.empty()) throw InputError("[nerve] needs 'vertices'");
        s_.nerve = Nerve(vertices_, edges_, triangles_);
        s_.samples.assign(vertices_.size(), {});
        if (basepoint_) s_.basepoint = s_.nerve.vertices()[s_.nerve.index_of(*basepoint_)];
        break;
      case 2:
        for (const auto& [a, b] : s_.nerve.edges()) {
          if (!g_.count({a, b}) && !g_.count({b, a})) {
            throw IncompleteCocycle("cocycle has no value on edge " + s_.nerve.edge_name(a, b));
          }
        }
        s_.cocycle = GLCocycle(s_.rank, g_);
        break;
      case 3:
        if (!present) break;
        if (!rep_) throw InputError("[representation] needs 'group'");
        for (std::size_t i = 0; i < images_.size(); ++i) {
          if (!images_[i]) throw InputError("no image for generator " + rep_->group.generator_names()[i]);
          rep_->images.push_back(*images_[i]);
        }
        Representation(rep_->group, rep_->images, s_.rank);
        s_.representation = rep_;
        break;
      case 4:
        for (std::size_t c = 0; c < s_.samples.size(); ++c) {
          if (s_.samples[c].empty()) s_.samples[c].push_back({"o", std::vector<Rational>(s_.rank, Rational(1))});
        }
        break;
      default:
        break;
    }
  }

  void finish() {
    if (section_ < 1) throw InputError("scenario needs [scenario] and [nerve] sections");
    advance(8);
    AtlasModel(s_.nerve, s_.cocycle, s_.samples, s_.overlaps);
  }

  ParseOptions opt_;
  Scenario s_;
  int section_ = -1;
  std::set<std::string> seen_;
  std::optional<std::string> basepoint_;
  std::vector<std::string> vertices_;
  std::vector<OrientedEdge> edges_;
  std::vector<std::array<std::size_t, 3>> triangles_;
  std::map<OrientedEdge, TorusAut> g_;
  std::optional<RepresentationSpec> rep_;
  std::vector<std::optional<TorusAut>> images_;
};

}  // namespace detail

inline Scenario parse_scenario(std::string_view text, ParseOptions opt = {}) {
  return detail::ScenarioParser(opt).parse(text);
}

/// Canonical text form; parse(emit(s)) reproduces s.
inline std::string emit_scenario(const Scenario& s) {
  std::ostringstream o;
  const auto& V = s.nerve.vertices();
  o << "[scenario]\n";
  o << "version = " << s.version << "\n";
  if (!s.name.empty()) o << "name = " << s.name << "\n";
  o << "rank = " << s.rank << "\n";
  o << "fiber_rank = " << s.fiber_rank << "\n";
  o << "torus_order = " << s.torus_order << "\n";
  o << "fiber_order = " << s.fiber_order << "\n";
  o << "window = " << s.window << "\n";
  o << "threshold = " << to_string(s.threshold) << "\n";
  o << "good_cover = " << (s.good_cover ? "true" : "false") << "\n";
  if (s.basepoint) o << "basepoint = " << *s.basepoint << "\n";

  o << "\n[nerve]\nvertices =";
  for (const auto& v : V) o << " " << v;
  o << "\n";
  for (const auto& [a, b] : s.nerve.edges()) o << "edge = " << V[a] << " " << V[b] << "\n";
  for (const auto& t : s.nerve.triangles()) o << "triangle = " << V[t[0]] << " " << V[t[1]] << " " << V[t[2]] << "\n";

  o << "\n[cocycle]\n";
  for (const auto& [e, m] : s.cocycle.values()) o << "g " << V[e.first] << " " << V[e.second] << " = " << m.str() << "\n";

  if (s.representation) {
    const auto& R = *s.representation;
    o << "\n[representation]\ngroup = " << detail::group_str(R.group) << "\n";
    for (std::size_t i = 0; i < R.images.size(); ++i) {
      o << "image " << R.group.generator_names()[i] << " = " << R.images[i].str() << "\n";
    }
    for (const auto& [e, w] : R.transitions) {
      o << "transition " << V[e.first] << " " << V[e.second] << " = " << R.group.str(w) << "\n";
    }
  }

  o << "\n[samples]\n";
  for (std::size_t c = 0; c < V.size(); ++c) {
    for (const auto& cs : s.samples[c]) {
      o << "sample " << V[c] << " " << cs.label << " =";
      for (const auto& r : cs.r2) o << " " << to_string(r);
      o << "\n";
    }
  }

  if (!s.overlaps.empty()) {
    o << "\n[overlaps]\n";
    for (const auto& ov : s.overlaps) {
      for (auto [i, j] : ov.pairs) {
        o << "pair " << V[ov.a] << " " << V[ov.b] << " = " << s.samples[ov.a][i].label << " "
          << s.samples[ov.b][j].label << "\n";
      }
    }
  }

  if (s.lifting) {
    o << "\n[lifting]\n";
    for (const auto& h : s.lifting->homs) {
      o << "hom " << V[h.chart] << " " << (h.sample ? s.samples[h.chart][*h.sample].label : "*") << " = "
        << detail::affine_list_str(h.value, "u") << "\n";
    }
    if (s.lifting->twist) o << "twist = " << detail::affine_list_str(*s.lifting->twist, "u") << "\n";
  }

  if (!s.gluing.empty()) {
    o << "\n[gluing]\n";
    for (const auto& g : s.gluing) {
      o << "glue " << V[g.a] << " " << V[g.b] << " " << (g.sample ? s.samples[g.b][*g.sample].label : "*")
        << " = " << detail::affine_list_str(g.value, "th") << "\n";
    }
  }
  return o.str();
}

/// Angle a in fiber units of 1/m'; throws when a * m' is not integral.
inline std::int64_t fiber_units(const Rational& a, std::int64_t fiber_order) {
  __int128 num = static_cast<__int128>(a.numerator()) * fiber_order;
  if (num % a.denominator() != 0) {
    throw InputError("angle " + to_string(a) + " is not a multiple of 1/" + std::to_string(fiber_order) +
                     "; raise fiber_order");
  }
  return detail::mod(static_cast<std::int64_t>((num / a.denominator()) % fiber_order), fiber_order);
}

/// The model built from a scenario: sampled space, and when lifting data is
/// present the chart liftings, gluing and the optional twist.
struct ScenarioModel {
  std::shared_ptr<const SampledSpace> space;
  std::vector<ChartLifting> charts;
  GluingData gluing;
  std::optional<std::vector<AffineExpr>> twist;
};

inline ActionData scenario_action(const Scenario& s, const AtlasModel& A) {
  std::size_t base = s.basepoint ? s.nerve.index_of(*s.basepoint) : s.nerve.default_basepoint();
  auto hol = holonomy(s.nerve, s.cocycle, base);
  if (!s.representation) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < hol.generators.size(); ++i) names.push_back("g" + std::to_string(i + 1));
    Representation rho(FPGroup::free(names), hol.images, s.rank);
    return make_action_data(A, rho, EdgeTransitions::standard(s.nerve, hol, rho.group()), base);
  }
  const auto& R = *s.representation;
  Representation rho(R.group, R.images, s.rank);
  EdgeTransitions tr;
  if (R.transitions.empty()) {
    tr = EdgeTransitions::standard(s.nerve, hol, R.group);
  } else {
    std::map<OrientedEdge, GroupWord> w;
    for (const auto& e : s.nerve.edges()) w[e] = R.group.identity();
    for (const auto& [e, word] : R.transitions) {
      if (w.count(e)) {
        w[e] = word;
      } else {
        w[{e.second, e.first}] = R.group.inverse(word);
      }
    }
    tr = EdgeTransitions(R.group, std::move(w));
  }
  return make_action_data(A, rho, tr, base);
}

inline ScenarioModel build_model(const Scenario& s) {
  AtlasModel A(s.nerve, s.cocycle, s.samples, s.overlaps);
  auto D = scenario_action(s, A);
  ScenarioModel M;
  M.space = std::make_shared<const SampledSpace>(A, D, s.torus_order, s.window);
  if (!s.lifting) return M;
  TorusGrid grid(s.rank, s.torus_order);
  const auto k = s.fiber_rank;
  const auto m2 = s.fiber_order;
  for (std::size_t c = 0; c < s.nerve.vertices().size(); ++c) {
    ChartLifting L(c, s.samples[c].size(), grid, m2, k);
    auto assign = [&](const HomDecl& h, std::size_t smp) {
      std::vector<std::vector<std::int64_t>> coef;
      for (const auto& e : h.value) coef.push_back(e.coef);
      L.set_linear(smp, coef);
    };
    for (const auto& h : s.lifting->homs) {
      if (h.chart == c && !h.sample) {
        for (std::size_t smp = 0; smp < s.samples[c].size(); ++smp) assign(h, smp);
      }
    }
    for (const auto& h : s.lifting->homs) {
      if (h.chart == c && h.sample) assign(h, *h.sample);
    }
    M.charts.push_back(std::move(L));
  }
  M.gluing = GluingData(grid, m2, k);
  auto glue_one = [&](const GlueDecl& g, std::size_t smp) {
    std::vector<std::int64_t> constant;
    std::vector<std::vector<std::int64_t>> coef;
    for (const auto& e : g.value) {
      constant.push_back(fiber_units(e.constant, m2));
      coef.push_back(e.coef);
    }
    M.gluing.set_affine(g.a, g.b, smp, constant, coef);
  };
  for (const auto& g : s.gluing) {
    if (!g.sample) {
      for (std::size_t smp = 0; smp < s.samples[g.b].size(); ++smp) {
        if (A.matched(A.node_id(g.b, smp), g.a)) glue_one(g, smp);
      }
    }
  }
  for (const auto& g : s.gluing) {
    if (g.sample) glue_one(g, *g.sample);
  }
  M.twist = s.lifting->twist;
  return M;
}

/// tau(u, x) = twist(u), independent of x.
inline CochainTable twist_table(const std::vector<AffineExpr>& twist, const FiniteModule& M) {
  CochainTable tau(1, M);
  std::vector<std::vector<std::int64_t>> coef;
  for (const auto& e : twist) coef.push_back(e.coef);
  for (std::size_t u = 0; u < M.torus.size(); ++u) {
    auto v = ChartLifting::linear_value(M.torus, M.fiber_order, coef, u);
    for (std::size_t x = 0; x < M.points; ++x) {
      for (std::size_t c = 0; c < M.fiber_rank; ++c) tau.set(u, x, c, v[c]);
    }
  }
  return tau;
}

/// The assembled lifting, twisted when the scenario asks for it.
inline GlobalLifting scenario_lifting(const ScenarioModel& M) {
  auto L = assemble_global_lifting(M.space, M.charts, M.gluing);
  if (M.twist) L = twist_lifting(L, twist_table(*M.twist, L.module()));
  return L;
}

}  // namespace torlift
