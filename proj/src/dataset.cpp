#include "faast/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>

#include <nlohmann/json.hpp>

#include "faast/errors.hpp"
#include "faast/io_util.hpp"
#include "faast/java_parser.hpp"
#include "faast/nn.hpp"

namespace faast {

namespace {

const char* kCloneTypeNames[] = {"T1", "T2", "ST3", "MT3", "WT3T4", "NonClone"};

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

Granularity granularity_from_name(const std::string& name) {
    if (name == "method") return Granularity::Method;
    if (name == "class") return Granularity::Class;
    raise(ErrorCode::Io, "unknown granularity '" + name + "'");
}

std::string granularity_name(Granularity g) {
    return g == Granularity::Method ? "method" : "class";
}

}  // namespace

std::string clone_type_name(CloneType t) { return kCloneTypeNames[static_cast<int>(t)]; }

CloneType clone_type_from_name(const std::string& name) {
    for (int i = 0; i < 6; ++i)
        if (name == kCloneTypeNames[i]) return static_cast<CloneType>(i);
    raise(ErrorCode::Io, "unknown clone type '" + name + "'");
}

void FragmentStore::insert(SourceFragment fragment) {
    std::string id = fragment.id;
    auto [it, inserted] = entries_.emplace(id, Entry{std::move(fragment), std::nullopt, 0});
    if (!inserted) raise(ErrorCode::DuplicateId, "duplicate fragment id '" + id + "'");
}

const SourceFragment& FragmentStore::fragment(const std::string& id) const {
    auto it = entries_.find(id);
    if (it == entries_.end()) raise(ErrorCode::UnknownFragment, "unknown fragment '" + id + "'");
    return it->second.fragment;
}

const FlowGraph& FragmentStore::graph(const std::string& id) {
    auto it = entries_.find(id);
    if (it == entries_.end()) raise(ErrorCode::UnknownFragment, "unknown fragment '" + id + "'");
    Entry& e = it->second;
    std::uint64_t key = fnv1a(e.fragment.code) ^ kFaAstRuleVersion;
    if (!e.graph || e.graph_key != key) {
        e.graph = fa_ast::build(parse_fragment(e.fragment));
        e.graph_key = key;
    }
    return *e.graph;
}

std::vector<std::string> FragmentStore::ids() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (auto& [id, _] : entries_) out.push_back(id);
    return out;
}

namespace {

void load_record_file(const std::string& path, LoadResult& result) {
    std::vector<std::string> lines = io::read_lines(path);
    if (lines.empty()) raise(ErrorCode::Io, "empty record file: " + path);
    size_t first = 0;
    auto header = nlohmann::json::parse(lines[0], nullptr, false);
    if (!header.is_discarded() && header.is_object() && header.contains("format")) {
        if (header.value("format", "") != "faast.fragments")
            raise(ErrorCode::Io, "not a fragment record file: " + path);
        first = 1;
    }
    for (size_t i = first; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(lines[i]);
        } catch (const nlohmann::json::exception& e) {
            raise(ErrorCode::Io, path + ":" + std::to_string(i + 1) + ": " + e.what());
        }
        SourceFragment f;
        f.id = j.at("id").get<std::string>();
        f.granularity = granularity_from_name(j.at("granularity").get<std::string>());
        f.code = j.at("code").get<std::string>();
        try {
            parse_fragment(f);
        } catch (const Error& e) {
            result.skipped.push_back({f.id, e.what()});
            continue;
        }
        result.store.insert(std::move(f));
    }
}

void load_source_file(const std::filesystem::path& file, const std::string& id,
                      Granularity granularity, LoadResult& result) {
    SourceFragment f{id, io::read_file(file.string()), granularity};
    try {
        parse_fragment(f);
    } catch (const Error& e) {
        result.skipped.push_back({id, e.what()});
        return;
    }
    result.store.insert(std::move(f));
}

}  // namespace

LoadResult load_corpus(const std::string& path, Granularity file_granularity) {
    LoadResult result;
    std::filesystem::path p(path);
    if (std::filesystem::is_directory(p)) {
        std::vector<std::filesystem::path> files;
        for (auto& entry : std::filesystem::recursive_directory_iterator(p))
            if (entry.is_regular_file() && entry.path().extension() == ".java")
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (auto& file : files)
            load_source_file(file, std::filesystem::relative(file, p).string(),
                             file_granularity, result);
    } else if (std::filesystem::is_regular_file(p)) {
        if (p.extension() == ".java")
            load_source_file(p, p.filename().string(), file_granularity, result);
        else
            load_record_file(path, result);
    } else {
        raise(ErrorCode::Io, "no such path: " + path);
    }
    if (result.store.size() == 0)
        raise(ErrorCode::EmptyCorpus, "no fragments loaded from " + path);
    return result;
}

void save_fragments(const std::string& path, const FragmentStore& store) {
    std::string out =
        nlohmann::json{{"format", "faast.fragments"}, {"version", 1}}.dump() + "\n";
    for (const std::string& id : store.ids()) {
        const SourceFragment& f = store.fragment(id);
        out += nlohmann::json{{"code", f.code},
                              {"granularity", granularity_name(f.granularity)},
                              {"id", f.id}}
                   .dump() +
               "\n";
    }
    io::atomic_write(path, out);
}

void save_skip_report(const std::string& path, const std::vector<SkippedFragment>& skipped) {
    std::string out =
        nlohmann::json{{"format", "faast.skip_report"}, {"version", 1}}.dump() + "\n";
    for (const SkippedFragment& s : skipped)
        out += nlohmann::json{{"error", s.error}, {"id", s.id}}.dump() + "\n";
    io::atomic_write(path, out);
}

void save_pairs(const std::string& path, const std::vector<FragmentPair>& pairs) {
    std::string out = nlohmann::json{{"format", "faast.pairs"}, {"version", 1}}.dump() + "\n";
    for (const FragmentPair& p : pairs) {
        nlohmann::json j{{"id1", p.id1}, {"id2", p.id2}, {"label", p.label}};
        if (p.clone_type) j["clone_type"] = clone_type_name(*p.clone_type);
        out += j.dump() + "\n";
    }
    io::atomic_write(path, out);
}

std::vector<FragmentPair> load_pairs(const std::string& path) {
    std::vector<std::string> lines = io::read_lines(path);
    if (lines.empty()) raise(ErrorCode::Io, "empty pair file: " + path);
    size_t first = 0;
    auto header = nlohmann::json::parse(lines[0], nullptr, false);
    if (!header.is_discarded() && header.is_object() && header.contains("format")) {
        if (header.value("format", "") != "faast.pairs")
            raise(ErrorCode::Io, "not a pair file: " + path);
        first = 1;
    }
    std::vector<FragmentPair> out;
    for (size_t i = first; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(lines[i]);
        } catch (const nlohmann::json::exception& e) {
            raise(ErrorCode::Io, path + ":" + std::to_string(i + 1) + ": " + e.what());
        }
        FragmentPair p;
        p.id1 = j.at("id1").get<std::string>();
        p.id2 = j.at("id2").get<std::string>();
        p.label = j.at("label").get<int>();
        if (p.label != 1 && p.label != -1)
            raise(ErrorCode::Io, "pair label must be +1 or -1");
        if (p.id1 == p.id2) raise(ErrorCode::Io, "pair with identical ids '" + p.id1 + "'");
        if (j.contains("clone_type"))
            p.clone_type = clone_type_from_name(j["clone_type"].get<std::string>());
        out.push_back(std::move(p));
    }
    return out;
}

PairSplit split_pairs(const std::vector<FragmentPair>& pairs, const SplitSpec& spec) {
    if (spec.train < 0 || spec.valid < 0 || spec.test < 0 ||
        spec.train + spec.valid + spec.test <= 0)
        raise(ErrorCode::Config, "split ratios must be nonnegative with positive sum");
    std::vector<FragmentPair> shuffled = pairs;
    nn::Rng rng(spec.seed);
    rng.shuffle(shuffled);
    double total = spec.train + spec.valid + spec.test;
    auto n = static_cast<double>(shuffled.size());
    auto cut1 = static_cast<size_t>(std::llround(n * spec.train / total));
    auto cut2 = static_cast<size_t>(std::llround(n * (spec.train + spec.valid) / total));
    PairSplit out;
    out.train.assign(shuffled.begin(), shuffled.begin() + static_cast<long>(cut1));
    out.valid.assign(shuffled.begin() + static_cast<long>(cut1),
                     shuffled.begin() + static_cast<long>(cut2));
    out.test.assign(shuffled.begin() + static_cast<long>(cut2), shuffled.end());
    return out;
}

std::map<CloneType, int> type_breakdown(const std::vector<FragmentPair>& pairs) {
    std::map<CloneType, int> counts;
    for (const FragmentPair& p : pairs) {
        if (!p.clone_type)
            raise(ErrorCode::MissingTypeTags,
                  "pair (" + p.id1 + ", " + p.id2 + ") has no clone type tag");
        ++counts[*p.clone_type];
    }
    return counts;
}

void save_synth_manifest(const std::string& path, const SynthSpec& spec,
                         const SynthCorpus& corpus) {
    nlohmann::json j;
    j["format"] = "faast.synth_manifest";
    j["version"] = 1;
    j["seed"] = spec.seed;
    j["n_functionalities"] = spec.n_functionalities;
    j["variants_per_functionality"] = spec.variants_per_functionality;
    j["functionality"] = corpus.functionality;
    io::atomic_write(path, j.dump(2) + "\n");
}

}  // namespace faast
