#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hogsos/config.hpp"
#include "hogsos/harness.hpp"

namespace {

using namespace hogsos;
using nlohmann::ordered_json;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(errc::config_error, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Language load_lang(const std::string& name, const std::string& rules_path) {
  if (rules_path.empty()) return make_language(name);
  ParsedTable pt = parse_rule_table(slurp(rules_path));
  return make_language(name, &pt);
}

Term parse_term(const Language& lang, const std::string& text,
                const std::vector<std::string>& free_names) {
  if (free_names.empty()) return lang.parse(text);
  return lang.parse_open(text, free_names);
}

// Flag values; `effective` folds the ones actually given over the config
// stack (defaults < file < environment < flags).
struct Flags {
  long long depth = 0, probe_size = 0, term_size = 0, samples = 0, fuel = 0, pool_cap = 0;
  long long seed = 0, stage = -1, max_stage = 0;
  std::string format, rules, config, out;
  std::vector<std::string> free_names;
};

void add_tuning(CLI::App* sub, Flags& f) {
  sub->add_option("--depth", f.depth, "observation depth");
  sub->add_option("--probe-size", f.probe_size, "max probe term size");
  sub->add_option("--term-size", f.term_size, "max sampled term size");
  sub->add_option("--samples", f.samples, "sample count");
  sub->add_option("--fuel", f.fuel, "step budget for traces");
  sub->add_option("--seed", f.seed, "random seed");
  sub->add_option("--pool-cap", f.pool_cap, "probes kept per sort, smallest first (0 = all)");
  sub->add_option("--format", f.format, "output format: text, json or dot")
      ->check(CLI::IsMember({"text", "json", "dot"}));
  sub->add_option("--config", f.config, "config file (key = value lines)");
}

Config effective(const CLI::App* sub, const Flags& f) {
  Config c = load_config(f.config);
  auto put = [&](const char* flag, const char* key, long long v) {
    if (sub->count(flag)) config_detail::set_key(c, key, std::to_string(v));
  };
  put("--depth", "depth", f.depth);
  put("--probe-size", "probe_size", f.probe_size);
  put("--term-size", "term_size", f.term_size);
  put("--samples", "samples", f.samples);
  put("--fuel", "fuel", f.fuel);
  put("--seed", "seed", f.seed);
  put("--pool-cap", "pool_cap", f.pool_cap);
  if (sub->count("--format")) c.format = f.format;
  return c;
}

TermProbes capped(TermProbes tp, const Config& cfg) {
  if (cfg.pool_cap > 0) return cap_pools(std::move(tp), static_cast<size_t>(cfg.pool_cap));
  return tp;
}

const char* tag_symbol(const std::string& tag) {
  if (tag == "terminal") return "✓";
  if (tag == "reduct") return "→";
  if (tag == "function") return "→t";
  return "?";
}

// --- trace ------------------------------------------------------------

int cmd_trace(const std::string& lang_name, const std::string& text, const Flags& f,
              const CLI::App* sub) {
  Config cfg = effective(sub, f);
  Language lang = load_lang(lang_name, f.rules);
  Term t = parse_term(lang, text, f.free_names);
  if (f.stage >= 0 && !lang.law->guarded)
    fail(errc::unsupported, "--stage applies to the guarded languages (xcl, xnccl, lambda)");

  OperationalModel model(*lang.law);
  if (f.stage == 0) {
    // stage 0 of a guarded language observes nothing: the trivial payload
    if (cfg.format == "json") {
      ordered_json j{{"schema", "trace/1"}, {"lang", lang.name},   {"entries", {lang.print(t)}},
                     {"stop", "stage"},     {"branches", ordered_json::array()}};
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << lang.print(t) << " ▷\n";
    }
    return 0;
  }
  int cap = f.stage > 0 ? std::min<long long>(cfg.fuel, f.stage) : cfg.fuel;
  Trace tr = run_trace(model, t, cap);
  bool stage_cut = f.stage > 0 && tr.stop == TraceStop::fuel;

  std::vector<std::pair<Rational, Term>> branches;
  Effect branch_effect = Effect::deterministic;
  if (tr.stop == TraceStop::branch) {
    Behavior<Term> b = model(tr.entries.back().term);
    branch_effect = b.bag.effect;
    branches = b.bag.items;
  }

  if (cfg.format == "json") {
    ordered_json entries = ordered_json::array();
    for (const TraceEntry& e : tr.entries) entries.push_back(lang.print(e.term));
    const char* stop = tr.stop == TraceStop::terminal ? "terminal"
                       : tr.stop == TraceStop::value  ? "value"
                       : tr.stop == TraceStop::branch ? "branch"
                       : stage_cut                    ? "stage"
                                                      : "fuel";
    ordered_json bs = ordered_json::array();
    for (const auto& [w, s] : branches)
      bs.push_back(ordered_json{{"w", rational_str(w)}, {"term", lang.print(s)}});
    ordered_json j{{"schema", "trace/1"}, {"lang", lang.name}, {"entries", entries},
                   {"stop", stop},        {"branches", bs}};
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  if (cfg.format == "dot") fail(errc::config_error, "dot output applies to denote");

  for (size_t i = 0; i < tr.entries.size(); ++i) {
    std::cout << (i ? "→ " : "") << lang.print(tr.entries[i].term);
    if (i + 1 == tr.entries.size()) {
      if (tr.stop == TraceStop::terminal) std::cout << " ✓";
      if (tr.stop == TraceStop::value) std::cout << " →t";
      if (tr.stop == TraceStop::fuel) std::cout << (stage_cut ? " ▷" : " …");
    }
    std::cout << "\n";
  }
  for (const auto& [w, s] : branches) {
    if (branch_effect == Effect::distribution)
      std::cout << "→[" << rational_str(w) << "] " << lang.print(s) << "\n";
    else
      std::cout << "→∈ " << lang.print(s) << "\n";
  }
  return 0;
}

// --- denote -----------------------------------------------------------

bool tree_uses_probes(const FiniteTree& t) {
  if (!t.probes.empty() || !t.substs.empty()) return true;
  for (const auto& [w, k] : t.kids)
    if (tree_uses_probes(k)) return true;
  return false;
}

void render_tree(std::ostream& os, const FiniteTree& t, int indent, const std::string& edge) {
  os << std::string(indent, ' ') << edge << tag_symbol(step_tag_name(t.tag));
  if (t.cut) os << " ▷";
  os << "\n";
  for (const auto& [w, k] : t.kids) {
    std::string label = t.effect == Effect::deterministic ? ""
                        : t.effect == Effect::distribution
                            ? "[" + rational_str(w) + "] "
                            : "∈ ";
    render_tree(os, k, indent + 2, label);
  }
  for (const auto& [p, k] : t.probes) render_tree(os, k, indent + 2, "·p" + p + " ⇒ ");
  for (const auto& [e, k] : t.substs) render_tree(os, k, indent + 2, "σ" + e + " ⇒ ");
}

int cmd_denote(const std::string& lang_name, const std::string& text, const Flags& f,
               const CLI::App* sub) {
  Config cfg = effective(sub, f);
  Language lang = load_lang(lang_name, f.rules);
  Term t = parse_term(lang, text, f.free_names);

  DenotationalModel dm(*lang.law);
  TermProbes tp = capped(lang.term_probes(cfg.probe_size, {t}), cfg);
  Observer obs(*lang.law, denote_probes(dm, tp));
  FiniteTree ft = obs.truncate(dm.denote(t), cfg.depth);

  if (cfg.format == "dot") {
    std::cout << tree_to_dot(ft);
    return 0;
  }
  if (cfg.format == "json") {
    ordered_json pools = ordered_json::object();
    for (const auto& [sort, pool] : tp.pool) {
      ordered_json a = ordered_json::array();
      for (const Term& p : pool) a.push_back(lang.print(p));
      pools[sort.name()] = a;
    }
    ordered_json envs = ordered_json::object();
    for (const auto& [sort, es] : tp.envs) {
      ordered_json a = ordered_json::array();
      for (const auto& [env, target] : es) {
        ordered_json terms = ordered_json::array();
        for (const Term& e : env) terms.push_back(lang.print(e));
        a.push_back(ordered_json{{"env", terms}, {"target", target.name()}});
      }
      envs[sort.name()] = a;
    }
    ordered_json j{{"schema", "denote/1"},
                   {"lang", lang.name},
                   {"term", lang.print(t)},
                   {"depth", cfg.depth},
                   {"probes", pools},
                   {"envs", envs},
                   {"tree", tree_to_json(ft)}};
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  std::ostringstream os;
  render_tree(os, ft, 0, "");
  std::cout << os.str();
  if (tree_uses_probes(ft)) {
    std::cout << "probes:\n";
    for (const auto& [sort, pool] : tp.pool) {
      std::cout << "  " << sort.name() << ":";
      for (size_t i = 0; i < pool.size(); ++i)
        std::cout << " p" << i << "=" << lang.print(pool[i]);
      std::cout << "\n";
    }
    for (const auto& [sort, es] : tp.envs) {
      std::cout << "  envs " << sort.name() << ":";
      for (size_t i = 0; i < es.size(); ++i) {
        std::cout << " σ" << i << "=[";
        for (size_t k = 0; k < es[i].first.size(); ++k)
          std::cout << (k ? ", " : "") << lang.print(es[i].first[k]);
        std::cout << "]:" << es[i].second.name();
      }
      std::cout << "\n";
    }
  }
  return 0;
}

// --- bisim ------------------------------------------------------------

std::string step_text(const BisimStep& s, const Language& lang, bool at_root) {
  if (s.kind == "tag")
    return std::string(at_root ? "root tags " : "tags ") + tag_symbol(s.left) + " vs " +
           tag_symbol(s.right);
  if (s.kind == "step") return "step";
  if (s.kind == "probe") return "apply to " + lang.print(s.probe_term);
  if (s.kind == "subst") {
    std::string env = "[";
    for (size_t i = 0; i < s.env.size(); ++i) env += (i ? ", " : "") + lang.print(s.env[i]);
    return "close with " + env + "]";
  }
  if (s.kind == "mass")
    return "class of " + s.detail + " carries mass " + s.left + " vs " + s.right;
  if (s.kind == "only-in")
    return "successor " + lang.print(s.elem) + " only on the " +
           (s.elem_left ? "left" : "right");
  return s.kind;
}

int cmd_bisim(const std::string& lang_name, const std::string& ptext, const std::string& qtext,
              const Flags& f, const CLI::App* sub) {
  Config cfg = effective(sub, f);
  Language lang = load_lang(lang_name, f.rules);
  Term p = parse_term(lang, ptext, f.free_names);
  Term q = parse_term(lang, qtext, f.free_names);

  OperationalModel model(*lang.law);
  TermProbes tp = capped(lang.term_probes(cfg.probe_size, {p, q}), cfg);
  BisimChecker chk(*lang.law, model, tp);
  BisimReport r = chk.check(p, q, cfg.depth);

  if (cfg.format == "json") {
    std::cout << witness_json(r, lang.print).dump(2) << "\n";
  } else {
    if (r.related) {
      std::cout << "related (depth " << r.depth << ")\n";
    } else {
      std::cout << "distinguished (depth " << r.depth << ")\n";
      for (const BisimStep& s : r.witness)
        std::cout << "  " << step_text(s, lang, r.witness.size() == 1) << "\n";
    }
  }
  return r.related ? 0 : 1;
}

// --- stage ------------------------------------------------------------

int cmd_stage(const std::string& lang_name, int n, const Flags& f, const CLI::App* sub) {
  Config cfg = effective(sub, f);
  std::optional<GuardedShape> shape = guarded_shape(lang_name);
  if (!shape) fail(errc::unsupported, "stage enumeration applies to xcl and xnccl");
  StageLimits lim;
  if (sub->count("--max-stage")) lim.max_stage = static_cast<int>(f.max_stage);
  std::vector<StageElement> elems = enumerate_stage(*shape, n, lim);

  if (cfg.format == "json") {
    ordered_json a = ordered_json::array();
    for (const StageElement& e : elems) a.push_back(stage_elem_str(e));
    ordered_json j{{"schema", "stage/1"},
                   {"lang", lang_name},
                   {"stage", n},
                   {"count", elems.size()},
                   {"elements", a}};
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  std::cout << elems.size() << " elements\n";
  for (const StageElement& e : elems) std::cout << "  " << stage_elem_str(e) << "\n";
  return 0;
}

// --- suite ------------------------------------------------------------

SuiteReport run_suite(const std::string& name, const Language& lang, const Config& cfg) {
  if (name == "adequacy") {
    auto pairs = gen_term_pairs(lang, cfg.term_size, cfg.samples, cfg.seed);
    std::vector<Term> roots;
    roots.reserve(2 * pairs.size());
    for (const auto& [p, q] : pairs) {
      roots.push_back(p);
      roots.push_back(q);
    }
    TermProbes tp = capped(lang.term_probes(cfg.probe_size, roots), cfg);
    return check_adequacy(lang, pairs, cfg.depth, tp, cfg.seed);
  }
  if (name == "compositionality") {
    auto samples = gen_samples(lang, cfg.term_size, cfg.samples, cfg.seed);
    TermProbes tp = capped(lang.term_probes(cfg.probe_size, samples), cfg);
    return check_compositionality(lang, samples, cfg.depth, tp, cfg.seed);
  }
  if (name == "bialgebra") {
    auto op = gen_samples(lang, cfg.term_size, cfg.samples, cfg.seed);
    auto den = gen_samples(lang, cfg.term_size, std::max(1, cfg.samples / 5), cfg.seed + 1);
    std::vector<Term> roots = op;
    roots.insert(roots.end(), den.begin(), den.end());
    TermProbes tp = capped(lang.term_probes(cfg.probe_size, roots), cfg);
    return check_bialgebra(lang, op, den, cfg.depth, tp, cfg.seed);
  }
  if (name == "tower")
    // deterministic stage 3 and powerset stage 2 are astronomically large,
    // so the iteration bound saturates at 3 (check_tower clamps further)
    return check_tower(lang, std::min(cfg.depth, 3), cfg.probe_size, cfg.seed);
  if (name == "ultrametric") {
    TermProbes tp = capped(lang.term_probes(cfg.probe_size, {}), cfg);
    return check_ultrametric(lang, cfg.samples, cfg.depth, tp, cfg.term_size, cfg.seed);
  }
  if (name == "guardedness") return check_guardedness(lang, cfg.samples, cfg.probe_size, cfg.seed);
  fail(errc::config_error, "unknown suite '" + name +
                               "' (adequacy, compositionality, bialgebra, tower, ultrametric, "
                               "guardedness)");
}

int cmd_suite(const std::string& name, const std::string& lang_name, const Flags& f,
              const CLI::App* sub) {
  Config cfg = effective(sub, f);
  Language lang = load_lang(lang_name, f.rules);
  SuiteReport rep = run_suite(name, lang, cfg);
  std::string text = rep.jsonl();
  if (!f.out.empty()) {
    std::ofstream o(f.out, std::ios::binary);
    if (!o) fail(errc::config_error, "cannot write '" + f.out + "'");
    o << text;
  } else {
    std::cout << text;
  }
  return rep.ok() ? 0 : 1;
}

// --- rules ------------------------------------------------------------

int cmd_rules(const std::string& lang_name, const Flags& f) {
  Language lang = load_lang(lang_name, f.rules);
  std::cout << print_rule_table(*lang.law);
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"workbench for small-step higher-order languages: run traces, unfold "
               "denotations, decide step-indexed bisimilarity, enumerate behavior stages, "
               "and exercise the property suites"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "hogsos 1.0");
  auto langs = CLI::IsMember(language_names());

  Flags f;
  std::string lang_name, term_a, term_b, suite_name;
  int stage_n = 0;

  CLI::App* tr = app.add_subcommand("trace", "run a reduction trace");
  tr->add_option("lang", lang_name, "language")->required()->check(langs);
  tr->add_option("term", term_a, "term in the language's surface syntax")->required();
  tr->add_option("--stage", f.stage, "render the stage-n observable prefix (guarded languages)");
  tr->add_option("--free", f.free_names, "free variable names (lambda)");
  tr->add_option("--rules", f.rules, "rule table file overriding the builtin law");
  add_tuning(tr, f);

  CLI::App* de = app.add_subcommand("denote", "unfold a denotation to finite depth");
  de->add_option("lang", lang_name, "language")->required()->check(langs);
  de->add_option("term", term_a, "term")->required();
  de->add_option("--free", f.free_names, "free variable names (lambda)");
  de->add_option("--rules", f.rules, "rule table file");
  add_tuning(de, f);

  CLI::App* bi = app.add_subcommand("bisim", "decide step-indexed bisimilarity of two terms");
  bi->add_option("lang", lang_name, "language")->required()->check(langs);
  bi->add_option("p", term_a, "left term")->required();
  bi->add_option("q", term_b, "right term")->required();
  bi->add_option("--free", f.free_names, "free variable names (lambda)");
  bi->add_option("--rules", f.rules, "rule table file");
  add_tuning(bi, f);

  CLI::App* st = app.add_subcommand("stage", "enumerate the finite behavior set at a stage");
  st->add_option("lang", lang_name, "language")->required()->check(langs);
  st->add_option("n", stage_n, "stage index")->required()->check(CLI::NonNegativeNumber);
  st->add_option("--max-stage", f.max_stage, "raise the stage feasibility guard");
  add_tuning(st, f);

  CLI::App* su = app.add_subcommand("suite", "run a property suite, report JSON lines");
  su->add_option("name", suite_name, "adequacy | compositionality | bialgebra | tower | "
                                     "ultrametric | guardedness")
      ->required();
  su->add_option("--lang", lang_name, "language")->required()->check(langs);
  su->add_option("--rules", f.rules, "rule table file");
  su->add_option("--out", f.out, "write the report here instead of stdout");
  add_tuning(su, f);

  CLI::App* ru = app.add_subcommand("rules", "print a language's rule table");
  ru->add_option("lang", lang_name, "language")->required()->check(langs);
  ru->add_option("--rules", f.rules, "round-trip an external table instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (tr->parsed()) return cmd_trace(lang_name, term_a, f, tr);
  if (de->parsed()) return cmd_denote(lang_name, term_a, f, de);
  if (bi->parsed()) return cmd_bisim(lang_name, term_a, term_b, f, bi);
  if (st->parsed()) return cmd_stage(lang_name, stage_n, f, st);
  if (su->parsed()) return cmd_suite(suite_name, lang_name, f, su);
  if (ru->parsed()) return cmd_rules(lang_name, f);
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
