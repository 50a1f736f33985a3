#pragma once

// Command layer: each command builds what it needs, runs its checks and
// returns a JSON body plus an exit code. Shared by the command-line tool and
// the acceptance runner.

#include <chrono>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hdl/cache.hpp"
#include "hdl/liealg.hpp"

namespace hdl {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kSchema = "hdl-result/1";

enum ExitCode : int { kPass = 0, kFail = 1, kInvalid = 2, kCap = 3 };

struct RunConfig {
  std::string command;
  std::uint32_t p = 2;
  unsigned m = 1;
  int n = 2;
  int r = 2;
  std::string torus;          // cycle type; empty = Coxeter
  std::string theta = "generic";  // all | generic | index | coordinates "a,b,…"
  std::string mode = "both";      // numeric | exact | both
  std::string format = "json";    // json | csv
  std::string cache_dir;
  unsigned workers = 1;

  std::vector<int> cycle_type() const {
    auto t = torus.empty() ? std::vector<int>{n} : parse_cycle_type(torus);
    int sum = 0;
    for (int c : t) sum += c;
    if (sum != n) throw domain_error("torus cycle type must partition n");
    return t;
  }
  GroupSpec spec() const { return GroupSpec(p, m, n, r, perm_from_cycle_type(cycle_type())); }
  nlohmann::ordered_json echo() const {
    return {{"command", command}, {"p", p},         {"m", m},           {"n", n},
            {"r", r},             {"torus", cycle_type_string(cycle_type())}, {"theta", theta}, {"mode", mode},
            {"format", format}};
  }
};

struct CommandResult {
  nlohmann::ordered_json body;
  int exit_code = kPass;
};

namespace detail {

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline nlohmann::ordered_json rational_json(const Rational& r) { return {r.num, r.den}; }

// Flat columns <prefix>_num, <prefix>_den, and the numeric route when requested.
inline void add_pairing(nlohmann::ordered_json& row, const std::string& prefix, const Pairing& p, const std::string& mode) {
  if (mode != "numeric") {
    row[prefix + "_num"] = p.exact.num;
    row[prefix + "_den"] = p.exact.den;
  }
  if (mode != "exact") {
    row[prefix + "_numeric_num"] = static_cast<std::int64_t>(std::llround(p.numeric.real() * static_cast<double>(p.exact.den)));
    if (mode == "numeric") row[prefix + "_den"] = p.exact.den;
    row[prefix + "_residual"] = p.residual;
  }
  if (mode == "both") row[prefix + "_agree"] = p.agree;
}

// The pairing value a given mode reports.
inline Rational pairing_value(const Pairing& p, const std::string& mode) {
  if (mode == "numeric") return {static_cast<std::int64_t>(std::llround(p.numeric.real() * static_cast<double>(p.exact.den))), p.exact.den};
  return p.exact;
}
inline bool pairing_mode_ok(const Pairing& p, const std::string& mode) { return mode != "both" || p.agree; }

struct Session {
  const RunConfig& cfg;
  nlohmann::ordered_json caches = nlohmann::ordered_json::array();

  GroupTablePtr group(const GroupSpec& spec) {
    auto res = load_or_build(spec, cfg.cache_dir);
    caches.push_back({{"spec", spec.cache_key()}, {"checksum", hex64(res.checksum)}, {"loaded", res.loaded}});
    return res.table;
  }
};

inline std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos) throw domain_error("bad θ coordinates '" + s + "'");
    out.push_back(std::stoi(tok));
  }
  return out;
}

// "all", "generic", a plain index, or dual coordinates "(a,b,…)" / "a,b,…".
template <class GenericFn>
std::vector<std::size_t> select_thetas(const RunConfig& cfg, const Torus& T, GenericFn&& generic) {
  if (cfg.theta == "generic") return generic();
  std::vector<std::size_t> out;
  if (cfg.theta == "all") {
    for (std::size_t i = 0; i < T.character_count(); ++i) out.push_back(i);
    return out;
  }
  const bool coords = cfg.theta.find_first_of("(,") != std::string::npos;
  std::string t = cfg.theta;
  std::erase(t, '(');
  std::erase(t, ')');
  if (!coords) {
    const auto list = parse_int_list(t);
    if (list.size() != 1 || static_cast<std::size_t>(list[0]) >= T.character_count()) throw domain_error("θ index out of range");
    return {static_cast<std::size_t>(list[0])};
  }
  const TorusCharacter th{parse_int_list(t)};
  if (th.coords.size() != T.dual().rank()) throw domain_error("θ coordinates have the wrong length");
  for (std::size_t i = 0; i < th.coords.size(); ++i)
    if (static_cast<std::uint64_t>(th.coords[i]) >= T.dual().orders()[i]) throw domain_error("θ coordinate out of range");
  return {T.character_index(th)};
}

inline std::vector<std::size_t> select_thetas(const RunConfig& cfg, const TorusSetting& s) {
  return select_thetas(cfg, s.torus(), [&] { return s.generic_characters(); });
}

inline nlohmann::ordered_json genericity_json(const GenericityReport& g) {
  return {{"regular", g.regular}, {"general_position", g.general_position}, {"stabilizer", g.stabilizer}, {"generic", g.generic()}};
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline CommandResult cmd_group(const RunConfig& cfg, detail::Session& ses) {
  const GroupSpec spec = cfg.spec();
  const auto G = ses.group(spec);
  const Torus T(spec);
  nlohmann::ordered_json b;
  b["order"] = G->size();
  b["closed_form"] = spec.closed_form_order();
  auto kernels = nlohmann::ordered_json::array();
  for (int i = 1; i < spec.r(); ++i) kernels.push_back({{"level", i}, {"order", G->subgroup(SubgroupTag::kernel(i)).size()}});
  b["kernels"] = kernels;
  b["torus_order"] = T.size();
  if (spec.even_level()) {
    b["radical_order"] = G->subgroup({SubgroupTag::Kind::arithmetic_radical, 0}).size();
    b["torus_times_radical_order"] = G->subgroup({SubgroupTag::Kind::torus_times_radical, 0}).size();
  } else {
    b["radical_order"] = nullptr;
    b["torus_times_radical_order"] = nullptr;
  }
  const bool ok = G->size() == spec.closed_form_order() && T.size() == T.order_formula();
  return {b, ok ? kPass : kFail};
}

inline CommandResult cmd_torus(const RunConfig& cfg, detail::Session&) {
  const GroupSpec spec = cfg.spec();
  const Torus T(spec);
  nlohmann::ordered_json b;
  b["cycle_type"] = cycle_type_string(T.cycle_type());
  b["order"] = T.size();
  b["order_formula"] = T.order_formula();
  b["weyl_order"] = T.weyl_group().size();
  b["weyl_order_formula"] = T.weyl_order_formula();
  b["character_count"] = T.character_count();
  b["invariant_orders"] = T.dual().orders();
  b["value_order"] = T.value_order();
  if (spec.r() >= 2 && spec.n() >= 2) {
    auto roots = nlohmann::ordered_json::array();
    for (int a = 0; a < spec.n(); ++a)
      for (int c = 0; c < spec.n(); ++c)
        if (a != c) roots.push_back({{"root", {a + 1, c + 1}}, {"norm_image_order", T.norm_subgroup(a, c).size()}});
    b["root_norm_images"] = roots;
  }
  const bool ok = T.size() == T.order_formula() && T.weyl_group().size() == T.weyl_order_formula() && T.character_count() == T.size();
  return {b, ok ? kPass : kFail};
}

inline CommandResult cmd_chars(const RunConfig& cfg, detail::Session&) {
  const GroupSpec spec = cfg.spec();
  const Torus T(spec);
  const TorusCharacters C(T);
  auto rows = nlohmann::ordered_json::array();
  std::vector<std::size_t> all;
  for (std::size_t i = 0; i < T.character_count(); ++i) all.push_back(i);
  const auto sel = detail::select_thetas(cfg, T, [&] { return all; });
  for (auto i : sel) {
    const auto th = T.character(i);
    const auto g = C.genericity(th);
    if (cfg.theta == "generic" && !g.generic()) continue;
    nlohmann::ordered_json row{{"theta_id", i}, {"theta", th.to_string()}, {"beta", C.level_spec().to_string(C.extract_beta(th))}};
    row.update(detail::genericity_json(g));
    rows.push_back(row);
  }
  return {{{"character_count", T.character_count()}, {"rows", rows}}, kPass};
}

inline CommandResult cmd_verify_main(const RunConfig& cfg, detail::Session& ses) {
  const GroupSpec spec = cfg.spec();
  if (!spec.even_level()) throw domain_error("verify-main needs an even level r");
  TorusSetting s(ses.group(spec));
  const auto sel = detail::select_thetas(cfg, s);
  nlohmann::ordered_json b;
  auto rows = nlohmann::ordered_json::array();
  bool ok = true;
  std::size_t verified = 0;
  for (auto i : sel) {
    const auto g = s.characters().genericity(s.torus().character(i));
    if (!g.generic()) {
      rows.push_back({{"theta_id", i}, {"theta", s.torus().character(i).to_string()}, {"refused", "not generic"}});
      continue;
    }
    const auto rep = s.verify_main_theorem(i);
    const Rational norm = detail::pairing_value(rep.norm, cfg.mode);
    const bool pass = rep.degree_ok() && norm.is_integer(1) && detail::pairing_mode_ok(rep.norm, cfg.mode);
    ok = ok && pass;
    ++verified;
    nlohmann::ordered_json row{{"theta_id", i},
                               {"theta", rep.theta.to_string()},
                               {"beta", rep.beta},
                               {"degree", rep.degree},
                               {"target_degree", rep.target_degree}};
    detail::add_pairing(row, "norm", rep.norm, cfg.mode);
    row["pass"] = pass;
    rows.push_back(row);
  }
  b["rows"] = rows;
  if (s.torus().is_split() && spec.r() == 2) {
    // principal series: Mackey over B\G/B against direct inner products
    const MackeyPlan mp(s.group(), s.borel(), s.borel());
    auto ps = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < s.torus().character_count(); ++i)
      for (std::size_t j = 0; j < s.torus().character_count(); ++j) {
        const auto a = s.borel_lift(s.torus().character(i)), c = s.borel_lift(s.torus().character(j));
        const auto direct = s.inner_product(s.borel_plan().induce(a), s.borel_plan().induce(c));
        const auto mk = mp.pairing(a, c);
        const bool agree = direct.exact == mk.exact && detail::pairing_mode_ok(direct, cfg.mode) && detail::pairing_mode_ok(mk, cfg.mode);
        ok = ok && agree;
        ps.push_back({{"theta_id", i}, {"theta_prime_id", j}, {"direct", detail::rational_json(direct.exact)},
                      {"mackey", detail::rational_json(mk.exact)}, {"agree", agree}});
      }
    b["principal_series"] = ps;
  }
  b["verified"] = verified;
  if (verified == 0 && !b.contains("principal_series")) {
    b["error"] = "no generic character selected";
    return {b, kInvalid};
  }
  return {b, ok ? kPass : kFail};
}

struct Prop35Summary {
  std::size_t characters = 0, regular = 0, stabilizer = 0, general_position = 0;
  std::size_t exceptions = 0;  // stabilizer ≠ regular, or regular without general position
};

inline Prop35Summary prop35_scan(const TorusCharacters& C, nlohmann::ordered_json* rows = nullptr) {
  const Torus& T = C.torus();
  Prop35Summary s;
  for (std::size_t i = 0; i < T.character_count(); ++i) {
    const auto th = T.character(i);
    const auto g = C.genericity(th);
    ++s.characters;
    s.regular += g.regular;
    s.stabilizer += g.stabilizer;
    s.general_position += g.general_position;
    const bool exc = g.regular != g.stabilizer || (g.regular && !g.general_position);
    s.exceptions += exc;
    if (rows) {
      nlohmann::ordered_json row{{"theta_id", i}, {"theta", th.to_string()}};
      row.update(detail::genericity_json(g));
      rows->push_back(row);
    }
  }
  return s;
}

inline CommandResult cmd_prop35(const RunConfig& cfg, detail::Session&) {
  const GroupSpec spec = cfg.spec();
  const Torus T(spec);
  const TorusCharacters C(T);
  auto rows = nlohmann::ordered_json::array();
  const auto s = prop35_scan(C, &rows);
  nlohmann::ordered_json b{{"characters", s.characters},
                           {"regular", s.regular},
                           {"stabilizer", s.stabilizer},
                           {"general_position", s.general_position},
                           {"stabilizer_equals_regular", s.regular == s.stabilizer && s.exceptions == 0},
                           {"regular_within_general_position", s.exceptions == 0},
                           {"exceptions", s.exceptions},
                           {"asserted", T.is_coxeter()},
                           {"rows", rows}};
  // other tori: the same table, reported only
  return {b, s.exceptions == 0 || !T.is_coxeter() ? kPass : kFail};
}

inline nlohmann::ordered_json letellier_row_json(const LetellierRow& r, const Field& f, const std::string& mode) {
  nlohmann::ordered_json j{{"beta_type", r.type.to_string(f)},
                           {"beta_rep", r.beta_rep},
                           {"orbit_size", r.orbit_size},
                           {"torus_cycles", r.torus_cycles},
                           {"subgroup", r.subgroup},
                           {"theta_id", r.theta_index},
                           {"theta", r.theta_coords},
                           {"witness", r.witness}};
  const Rational v = detail::pairing_value(r.pairings.letellier, mode);
  j["pairing_num"] = v.num;
  j["pairing_den"] = v.den;
  j["nonzero"] = !v.is_zero();
  j["bracket_num"] = r.pairings.bracket.exact.num;
  j["bracket_den"] = r.pairings.bracket.exact.den;
  j["brackets_consistent"] = r.brackets_consistent();
  if (mode == "both") j["agree"] = r.pairings.letellier.agree && r.pairings.bracket.agree;
  if (r.witness_genericity) j["witness_generic"] = r.witness_genericity->generic();
  return j;
}

inline CommandResult cmd_letellier(const RunConfig& cfg, detail::Session&) {
  if (cfg.n != 2 && cfg.n != 3) throw domain_error("letellier supports n = 2, 3");
  const LetellierLab lab(cfg.p, cfg.m, cfg.n);
  const auto rep = lab.verify();
  const std::size_t brute = similarity_class_count_bruteforce(lab.algebra());
  auto rows = nlohmann::ordered_json::array();
  bool ok = rep.all_nonzero();
  for (const auto& r : rep.rows) {
    rows.push_back(letellier_row_json(r, lab.algebra().spec().field(), cfg.mode));
    ok = ok && r.brackets_consistent() && detail::pairing_mode_ok(r.pairings.letellier, cfg.mode);
  }
  ok = ok && rep.orbit_count == brute && rep.type_count == brute;
  nlohmann::ordered_json b{{"invariant_characters", rep.orbit_count},
                           {"similarity_types", rep.type_count},
                           {"similarity_classes_bruteforce", brute},
                           {"all_prescribed_nonzero", rep.all_prescribed_nonzero()},
                           {"all_nonzero", rep.all_nonzero()},
                           {"rows", rows}};
  return {b, ok ? kPass : kFail};
}

// θ pairs checked by the Mackey command: all pairs for small sets, otherwise
// each θ with itself, its successor and one Weyl conjugate.
inline std::vector<std::pair<std::size_t, std::size_t>> mackey_pairs(const TorusSetting& s, const std::vector<std::size_t>& thetas,
                                                                    std::size_t all_pairs_limit = 64) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (thetas.size() <= all_pairs_limit) {
    for (auto a : thetas)
      for (auto b : thetas) out.emplace_back(a, b);
    return out;
  }
  const Torus& T = s.torus();
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    out.emplace_back(thetas[i], thetas[i]);
    out.emplace_back(thetas[i], thetas[(i + 1) % thetas.size()]);
    if (T.weyl_group().size() > 1) out.emplace_back(thetas[i], T.character_index(T.weyl_act(T.weyl_group().back(), T.character(thetas[i]))));
  }
  return out;
}

struct MackeySummary {
  std::size_t pairs = 0, mackey_agree = 0, reciprocity = 0, reciprocity_agree = 0, dual_mode = 0, dual_mode_agree = 0;
  bool ok() const { return mackey_agree == pairs && reciprocity_agree == reciprocity && dual_mode_agree == dual_mode; }
};

inline MackeySummary mackey_scan(const TorusSetting& s, const std::vector<std::size_t>& thetas, nlohmann::ordered_json* rows = nullptr,
                                 std::size_t all_pairs_limit = 64) {
  MackeySummary sum;
  const MackeyPlan mp(s.group(), s.tu(), s.tu());
  const ClassFunction triv = trivial_class_function(s.classes());
  auto note_mode = [&](const Pairing& p) {
    ++sum.dual_mode;
    sum.dual_mode_agree += p.agree;
  };
  for (auto [a, b] : mackey_pairs(s, thetas, all_pairs_limit)) {
    const auto x = s.trivial_lift(s.torus().character(a)), y = s.trivial_lift(s.torus().character(b));
    const ClassFunction ix = s.tu_plan().induce(x), iy = s.tu_plan().induce(y);
    const auto direct = s.inner_product(ix, iy);
    const auto mk = mp.pairing(x, y);
    const ReciprocityCheck fr{direct, restricted_pairing(s.classes(), s.tu(), x, iy)};
    ++sum.pairs;
    sum.mackey_agree += direct.exact == mk.exact;
    ++sum.reciprocity;
    sum.reciprocity_agree += fr.equal();
    note_mode(direct);
    note_mode(mk);
    note_mode(fr.restricted_side);
    if (rows)
      rows->push_back({{"theta_id", a}, {"theta_prime_id", b}, {"direct", detail::rational_json(direct.exact)},
                       {"mackey", detail::rational_json(mk.exact)}, {"reciprocity", detail::rational_json(fr.restricted_side.exact)},
                       {"agree", direct.exact == mk.exact && fr.equal()}});
  }
  // reciprocity against the trivial character of G
  for (auto a : thetas) {
    const auto x = s.trivial_lift(s.torus().character(a));
    const auto fr = frobenius_reciprocity_check(s.group(), s.classes(), s.tu_plan(), x, triv);
    ++sum.reciprocity;
    sum.reciprocity_agree += fr.equal();
    note_mode(fr.induced_side);
    note_mode(fr.restricted_side);
  }
  return sum;
}

// Coxeter (TU^±) against the split Borel carried into the twisted model.
struct MixedMackeySummary {
  std::size_t pairs = 0, agree = 0;
  bool ok() const { return agree == pairs; }
};

inline MixedMackeySummary mixed_mackey_scan(const TorusSetting& twisted, const TorusSetting& split) {
  MixedMackeySummary sum;
  const SplitIsomorphism iso(twisted.spec(), split.spec());
  std::vector<std::int32_t> members;
  const Subgroup& B = split.borel();
  for (auto b : B.elems) {
    const auto k = twisted.group().index_of(iso.to_twisted(split.group().element(static_cast<std::size_t>(b))));
    check(k >= 0, "transported Borel element missing");
    members.push_back(k);
  }
  const Subgroup Bt(twisted.group().size(), members);
  // positions in Bt follow sorted twisted indices; remap split-Borel characters
  std::vector<std::size_t> remap(B.size());
  for (std::size_t i = 0; i < B.size(); ++i) remap[i] = static_cast<std::size_t>(Bt.pos[static_cast<std::size_t>(members[i])]);
  const InductionPlan plan(twisted.group(), twisted.classes(), Bt);
  const MackeyPlan mp(twisted.group(), twisted.tu(), Bt);
  for (auto a : twisted.generic_characters()) {
    const auto x = twisted.trivial_lift(twisted.torus().character(a));
    const ClassFunction ix = twisted.induced(twisted.torus().character(a));
    for (std::size_t j = 0; j < split.torus().character_count(); ++j) {
      const auto ys = split.borel_lift(split.torus().character(j));
      LinearCharacter y{ys.M, std::vector<std::uint32_t>(ys.exps.size())};
      for (std::size_t i = 0; i < ys.exps.size(); ++i) y.exps[remap[i]] = ys.exps[i];
      const auto direct = twisted.inner_product(ix, plan.induce(y));
      const auto mk = mp.pairing(x, y);
      ++sum.pairs;
      sum.agree += direct.exact == mk.exact && direct.agree && mk.agree;
    }
  }
  return sum;
}

inline CommandResult cmd_mackey_check(const RunConfig& cfg, detail::Session& ses) {
  const GroupSpec spec = cfg.spec();
  if (!spec.even_level()) throw domain_error("mackey-check needs an even level r");
  TorusSetting s(ses.group(spec));
  const auto sel = detail::select_thetas(cfg, s);
  auto rows = nlohmann::ordered_json::array();
  const auto sum = mackey_scan(s, sel, &rows);
  nlohmann::ordered_json b{{"pairs", sum.pairs},
                           {"mackey_agree", sum.mackey_agree},
                           {"reciprocity_checks", sum.reciprocity},
                           {"reciprocity_agree", sum.reciprocity_agree},
                           {"dual_mode_checks", sum.dual_mode},
                           {"dual_mode_agree", sum.dual_mode_agree}};
  bool ok = sum.ok();
  if (s.torus().is_coxeter() && spec.n() == 2 && spec.r() == 2) {
    TorusSetting split(ses.group(spec.split_form()));
    const auto mixed = mixed_mackey_scan(s, split);
    b["mixed_borel_pairs"] = mixed.pairs;
    b["mixed_borel_agree"] = mixed.agree;
    ok = ok && mixed.ok();
  }
  b["rows"] = rows;
  return {b, ok ? kPass : kFail};
}

// Runs one command; maps exceptions to exit codes.
inline CommandResult run_command(const RunConfig& cfg, double* elapsed_ms = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  default_workers() = std::max(1u, cfg.workers);
  detail::Session ses{cfg};
  CommandResult res;
  try {
    if (cfg.mode != "numeric" && cfg.mode != "exact" && cfg.mode != "both") throw domain_error("mode must be numeric, exact or both");
    if (cfg.command == "group") res = cmd_group(cfg, ses);
    else if (cfg.command == "torus") res = cmd_torus(cfg, ses);
    else if (cfg.command == "chars") res = cmd_chars(cfg, ses);
    else if (cfg.command == "verify-main") res = cmd_verify_main(cfg, ses);
    else if (cfg.command == "prop35") res = cmd_prop35(cfg, ses);
    else if (cfg.command == "letellier") res = cmd_letellier(cfg, ses);
    else if (cfg.command == "mackey-check") res = cmd_mackey_check(cfg, ses);
    else throw domain_error("unknown command '" + cfg.command + "'");
  } catch (const domain_error& e) {
    res = {{{"error", e.what()}}, kInvalid};
  } catch (const cap_exceeded& e) {
    res = {{{"error", e.what()}}, kCap};
  } catch (const verification_error& e) {
    res = {{{"error", e.what()}}, kFail};
  }
  if (elapsed_ms) *elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  nlohmann::ordered_json env;
  env["schema"] = kSchema;
  env["tool_version"] = kToolVersion;
  try {
    env["config"] = cfg.echo();
  } catch (const std::exception&) {
    env["config"] = {{"command", cfg.command}};
  }
  env["status"] = res.exit_code == kPass ? "pass" : res.exit_code == kFail ? "fail" : res.exit_code == kInvalid ? "invalid" : "cap";
  env["exit_code"] = res.exit_code;
  env["result"] = std::move(res.body);
  env["group_caches"] = ses.caches;
  res.body = std::move(env);
  return res;
}

// CSV of result.rows; scalar columns only, nested values as JSON text.
inline std::string render_csv(const nlohmann::ordered_json& envelope) {
  std::ostringstream os;
  const auto& result = envelope.at("result");
  if (!result.contains("rows") || result.at("rows").empty()) {
    os << "key,value\n";
    for (const auto& [k, v] : result.items()) os << k << "," << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
    return os.str();
  }
  const auto& rows = result.at("rows");
  std::vector<std::string> cols;
  for (const auto& [k, v] : rows.front().items()) cols.push_back(k);
  auto cell = [](const nlohmann::ordered_json& v) {
    std::string s = v.is_string() ? v.get<std::string>() : v.dump();
    if (s.find_first_of(",\"") != std::string::npos) {
      std::string q = "\"";
      for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
      return q + "\"";
    }
    return s;
  };
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << (row.contains(cols[i]) ? cell(row.at(cols[i])) : "");
    os << "\n";
  }
  return os.str();
}

}  // namespace hdl
