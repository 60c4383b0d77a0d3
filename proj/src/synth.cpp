#include <array>
#include <cstdlib>
#include <map>
#include <string>
#include <vector>

#include "faast/dataset.hpp"
#include "faast/errors.hpp"
#include "faast/nn.hpp"

namespace faast {

namespace {

/// How one variant of a functionality is mutated relative to the base.
struct VariantPlan {
    bool rename = false;
    bool while_loop = false;
    int extras = 0;
    bool tweak_literal = false;
};

struct Names {
    std::string method;
    std::array<std::string, 4> vars;  // role slots, template-specific meaning
};

const std::vector<std::string> kMethodPool = {"run",  "calc",  "apply",   "evalu", "proc",
                                              "work", "solve", "compute", "handle", "scan"};

const std::vector<std::string> kVarPool = {
    "a",   "b",   "c",   "d",   "g",    "h",   "k",   "m",   "p",   "q",
    "r",   "t",   "u",   "v",   "w",    "z",   "val", "tmp", "acc", "res",
    "cnt", "idx", "len", "cur", "best", "item", "data", "buf", "pos", "num"};

std::string pad_decl(int slot) { return "int pad" + std::to_string(slot) + " = 0;"; }
std::string pad_use(int slot) {
    return "pad" + std::to_string(slot) + " = pad" + std::to_string(slot) + " + 1;";
}

/// Renders the counted loop shared by most templates, in for or while form.
/// `init`, `cond`, `step` reference the loop variable; `body` lines are
/// already indented one level.
std::string loop_code(bool while_form, const std::string& var, const std::string& init,
                      const std::string& cond, const std::string& step,
                      const std::string& body) {
    if (!while_form) {
        return "  for (int " + var + " = " + init + "; " + cond + "; " + var + " = " + step +
               ") {\n" + body + "  }\n";
    }
    return "  int " + var + " = " + init + ";\n  while (" + cond + ") {\n" + body + "    " +
           var + " = " + step + ";\n  }\n";
}

struct Template {
    std::string tag;
    std::string base_method;
    std::array<std::string, 4> base_vars;
    // emit(names, plan) -> method source
    std::string (*emit)(const Names&, const VariantPlan&);
};

// vars: [0]=array/input, [1]=accumulator/result, [2]=loop var, [3]=extra (target...)
std::string emit_array_sum(const Names& n, const VariantPlan& p) {
    const std::string& xs = n.vars[0];
    const std::string& total = n.vars[1];
    const std::string& i = n.vars[2];
    std::string init = p.tweak_literal ? "1" : "0";
    std::string src = "int " + n.method + "(int[] " + xs + ") {\n";
    if (p.extras >= 1) src += "  " + pad_decl(0) + "\n";
    src += "  int " + total + " = " + init + ";\n";
    src += loop_code(p.while_loop, i, "0", i + " < " + xs + ".length", i + " + 1",
                     "    " + total + " = " + total + " + " + xs + "[" + i + "];\n");
    if (p.extras >= 2) src += "  " + pad_use(0) + "\n";
    src += "  return " + total + ";\n}\n";
    return src;
}

std::string emit_find_max(const Names& n, const VariantPlan& p) {
    const std::string& xs = n.vars[0];
    const std::string& best = n.vars[1];
    const std::string& i = n.vars[2];
    std::string start = p.tweak_literal ? "0" : "1";
    std::string src = "int " + n.method + "(int[] " + xs + ") {\n";
    src += "  int " + best + " = " + xs + "[0];\n";
    if (p.extras >= 1) src += "  " + pad_decl(0) + "\n";
    src += loop_code(p.while_loop, i, start, i + " < " + xs + ".length", i + " + 1",
                     "    if (" + xs + "[" + i + "] > " + best + ") {\n      " + best +
                         " = " + xs + "[" + i + "];\n    }\n");
    if (p.extras >= 2) src += "  " + pad_use(0) + "\n";
    src += "  return " + best + ";\n}\n";
    return src;
}

std::string emit_reverse_string(const Names& n, const VariantPlan& p) {
    const std::string& s = n.vars[0];
    const std::string& out = n.vars[1];
    const std::string& i = n.vars[2];
    std::string src = "String " + n.method + "(String " + s + ") {\n";
    if (p.extras >= 1) src += "  " + pad_decl(0) + "\n";
    src += "  String " + out + " = \"\";\n";
    src += loop_code(p.while_loop, i, s + ".length() - 1", i + " >= 0", i + " - 1",
                     "    " + out + " = " + out + " + " + s + ".charAt(" + i + ");\n");
    if (p.extras >= 2) src += "  " + pad_use(0) + "\n";
    src += "  return " + out + ";\n}\n";
    return src;
}

std::string emit_linear_search(const Names& n, const VariantPlan& p) {
    const std::string& xs = n.vars[0];
    const std::string& target = n.vars[1];
    const std::string& i = n.vars[2];
    std::string miss = p.tweak_literal ? "-2" : "-1";
    std::string src = "int " + n.method + "(int[] " + xs + ", int " + target + ") {\n";
    if (p.extras >= 1) src += "  " + pad_decl(0) + "\n";
    src += loop_code(p.while_loop, i, "0", i + " < " + xs + ".length", i + " + 1",
                     "    if (" + xs + "[" + i + "] == " + target + ") {\n      return " + i +
                         ";\n    }\n");
    if (p.extras >= 2) src += "  " + pad_use(0) + "\n";
    src += "  return " + miss + ";\n}\n";
    return src;
}

std::string emit_count_matches(const Names& n, const VariantPlan& p) {
    const std::string& xs = n.vars[0];
    const std::string& target = n.vars[1];
    const std::string& i = n.vars[2];
    const std::string& cnt = n.vars[3];
    std::string src = "int " + n.method + "(int[] " + xs + ", int " + target + ") {\n";
    src += "  int " + cnt + " = " + (p.tweak_literal ? "1" : "0") + ";\n";
    if (p.extras >= 1) src += "  " + pad_decl(0) + "\n";
    src += loop_code(p.while_loop, i, "0", i + " < " + xs + ".length", i + " + 1",
                     "    if (" + xs + "[" + i + "] == " + target + ") {\n      " + cnt +
                         " = " + cnt + " + 1;\n    }\n");
    if (p.extras >= 2) src += "  " + pad_use(0) + "\n";
    src += "  return " + cnt + ";\n}\n";
    return src;
}

std::string emit_factorial(const Names& n, const VariantPlan& p) {
    const std::string& num = n.vars[0];
    const std::string& acc = n.vars[1];
    const std::string& i = n.vars[2];
    std::string start = p.tweak_literal ? "1" : "2";
    std::string src = "long " + n.method + "(int " + num + ") {\n";
    src += "  long " + acc + " = 1;\n";
    if (p.extras >= 1) src += "  " + pad_decl(0) + "\n";
    src += loop_code(p.while_loop, i, start, i + " <= " + num, i + " + 1",
                     "    " + acc + " = " + acc + " * " + i + ";\n");
    if (p.extras >= 2) src += "  " + pad_use(0) + "\n";
    src += "  return " + acc + ";\n}\n";
    return src;
}

std::string emit_count_evens(const Names& n, const VariantPlan& p) {
    const std::string& xs = n.vars[0];
    const std::string& cnt = n.vars[1];
    const std::string& i = n.vars[2];
    std::string src = "int " + n.method + "(int[] " + xs + ") {\n";
    src += "  int " + cnt + " = " + (p.tweak_literal ? "1" : "0") + ";\n";
    if (p.extras >= 1) src += "  " + pad_decl(0) + "\n";
    src += loop_code(p.while_loop, i, "0", i + " < " + xs + ".length", i + " + 1",
                     "    if (" + xs + "[" + i + "] % 2 == 0) {\n      " + cnt + " = " + cnt +
                         " + 1;\n    }\n");
    if (p.extras >= 2) src += "  " + pad_use(0) + "\n";
    src += "  return " + cnt + ";\n}\n";
    return src;
}

std::string emit_clamp_all(const Names& n, const VariantPlan& p) {
    const std::string& xs = n.vars[0];
    const std::string& lim = n.vars[1];
    const std::string& i = n.vars[2];
    std::string src = "void " + n.method + "(int[] " + xs + ", int " + lim + ") {\n";
    if (p.extras >= 1) src += "  " + pad_decl(0) + "\n";
    src += loop_code(p.while_loop, i, "0", i + " < " + xs + ".length", i + " + 1",
                     "    if (" + xs + "[" + i + "] > " + lim + ") {\n      " + xs + "[" + i +
                         "] = " + lim + ";\n    }\n");
    if (p.extras >= 2) src += "  " + pad_use(0) + "\n";
    src += "}\n";
    return src;
}

const std::vector<Template> kTemplates = {
    {"array_sum", "sum", {"xs", "total", "i", ""}, emit_array_sum},
    {"find_max", "findMax", {"xs", "best", "i", ""}, emit_find_max},
    {"reverse_string", "reverse", {"s", "out", "i", ""}, emit_reverse_string},
    {"linear_search", "indexOf", {"xs", "target", "i", ""}, emit_linear_search},
    {"count_matches", "countMatches", {"xs", "target", "i", "cnt"}, emit_count_matches},
    {"factorial", "fact", {"n", "acc", "i", ""}, emit_factorial},
    {"count_evens", "countEvens", {"xs", "cnt", "i", ""}, emit_count_evens},
    {"clamp_all", "clampAll", {"xs", "lim", "i", ""}, emit_clamp_all},
};

Names draw_names(const Template& tmpl, bool rename, nn::Rng& rng) {
    Names names;
    if (!rename) {
        names.method = tmpl.base_method;
        names.vars = tmpl.base_vars;
        return names;
    }
    names.method = kMethodPool[rng.below(kMethodPool.size())];
    std::vector<std::string> pool = kVarPool;
    for (auto& slot : names.vars) {
        size_t pick = rng.below(pool.size());
        slot = pool[pick];
        pool.erase(pool.begin() + static_cast<long>(pick));
    }
    return names;
}

CloneType classify_pair(const std::string& code1, const std::string& code2,
                        const VariantPlan& p1, const VariantPlan& p2) {
    if (code1 == code2) return CloneType::T1;
    if (p1.while_loop != p2.while_loop) return CloneType::WT3T4;
    int extra_diff = std::abs(p1.extras - p2.extras);
    if (extra_diff >= 2) return CloneType::MT3;
    if (extra_diff == 1) return CloneType::ST3;
    return CloneType::T2;
}

}  // namespace

int max_synth_functionalities() { return static_cast<int>(kTemplates.size()); }

SynthCorpus gen_synthetic_corpus(const SynthSpec& spec) {
    if (spec.n_functionalities < 2)
        raise(ErrorCode::Config, "synthetic corpus needs at least 2 functionalities");
    if (spec.n_functionalities > max_synth_functionalities())
        raise(ErrorCode::Config,
              "at most " + std::to_string(max_synth_functionalities()) +
                  " functionality templates are available");
    if (spec.variants_per_functionality < 1)
        raise(ErrorCode::Config, "variants_per_functionality must be >= 1");

    nn::Rng rng(spec.seed);
    SynthCorpus corpus;
    std::map<std::string, VariantPlan> plans;
    std::map<std::string, std::string> codes;

    std::vector<std::vector<std::string>> ids_by_func;
    for (int f = 0; f < spec.n_functionalities; ++f) {
        const Template& tmpl = kTemplates[static_cast<size_t>(f)];
        std::vector<std::string> ids;
        for (int v = 0; v < spec.variants_per_functionality; ++v) {
            VariantPlan plan;
            if (v > 0) {
                plan.rename = rng.uniform() < 0.75;
                plan.while_loop = rng.uniform() < 0.4;
                plan.extras = static_cast<int>(rng.below(3));
                plan.tweak_literal = rng.uniform() < 0.4;
            }
            Names names = draw_names(tmpl, plan.rename, rng);
            std::string id = tmpl.tag + "_v" + std::to_string(v);
            std::string code = tmpl.emit(names, plan);
            corpus.store.insert({id, code, Granularity::Method});
            corpus.functionality[id] = tmpl.tag;
            plans[id] = plan;
            codes[id] = code;
            ids.push_back(id);
        }
        ids_by_func.push_back(std::move(ids));
    }

    for (const auto& ids : ids_by_func)
        for (size_t i = 0; i < ids.size(); ++i)
            for (size_t j = i + 1; j < ids.size(); ++j)
                corpus.pairs.push_back(
                    {ids[i], ids[j], 1,
                     classify_pair(codes[ids[i]], codes[ids[j]], plans[ids[i]], plans[ids[j]])});
    for (size_t f1 = 0; f1 < ids_by_func.size(); ++f1)
        for (size_t f2 = f1 + 1; f2 < ids_by_func.size(); ++f2)
            for (const auto& id1 : ids_by_func[f1])
                for (const auto& id2 : ids_by_func[f2])
                    corpus.pairs.push_back({id1, id2, -1, CloneType::NonClone});
    return corpus;
}

}  // namespace faast
