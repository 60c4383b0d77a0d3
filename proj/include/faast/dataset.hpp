#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "faast/ast.hpp"
#include "faast/flow_graph.hpp"

namespace faast {

enum class CloneType { T1, T2, ST3, MT3, WT3T4, NonClone };

std::string clone_type_name(CloneType t);
CloneType clone_type_from_name(const std::string& name);

struct FragmentPair {
    std::string id1, id2;
    int label = 1;  // +1 true clone, -1 false clone
    std::optional<CloneType> clone_type;
};

/// Fragments by id with lazily built, content-keyed FA-AST caches.
class FragmentStore {
public:
    void insert(SourceFragment fragment);  // Error{DuplicateId} on repeat
    bool has(const std::string& id) const { return entries_.count(id) > 0; }
    const SourceFragment& fragment(const std::string& id) const;

    /// FA-AST of the fragment; built on first use and cached. The cache key
    /// includes the fragment code hash and the edge-rule version, so a
    /// stale entry is rebuilt.
    const FlowGraph& graph(const std::string& id);

    std::vector<std::string> ids() const;
    int size() const { return static_cast<int>(entries_.size()); }

private:
    struct Entry {
        SourceFragment fragment;
        std::optional<FlowGraph> graph;
        std::uint64_t graph_key = 0;
    };
    std::map<std::string, Entry> entries_;
};

/// Bumped when any FA-AST edge rule changes; invalidates cached graphs.
inline constexpr std::uint64_t kFaAstRuleVersion = 1;

struct SkippedFragment {
    std::string id;
    std::string error;
};

struct LoadResult {
    FragmentStore store;
    std::vector<SkippedFragment> skipped;
};

/// Load fragments from (a) a line-delimited record file, (b) a directory
/// tree of .java files, or (c) a single source file. Fragments that fail
/// to parse are collected in the skip report rather than aborting the
/// load. Throws Error{CorpusEmpty-like EmptyCorpus} when nothing loads and
/// Error{DuplicateId} on repeated ids.
LoadResult load_corpus(const std::string& path,
                       Granularity file_granularity = Granularity::Class);

/// Record-file round trip.
void save_fragments(const std::string& path, const FragmentStore& store);
void save_skip_report(const std::string& path, const std::vector<SkippedFragment>& skipped);

void save_pairs(const std::string& path, const std::vector<FragmentPair>& pairs);
std::vector<FragmentPair> load_pairs(const std::string& path);

struct SplitSpec {
    double train = 8, valid = 1, test = 1;
    std::uint64_t seed = 7;
};

struct PairSplit {
    std::vector<FragmentPair> train, valid, test;
};

/// Seeded shuffle then contiguous cut by normalized ratios; the three
/// lists partition the input.
PairSplit split_pairs(const std::vector<FragmentPair>& pairs, const SplitSpec& spec);

/// Counts per clone type. Requires every pair to carry a tag.
std::map<CloneType, int> type_breakdown(const std::vector<FragmentPair>& pairs);

// --- bundled synthetic corpus -------------------------------------------

struct SynthSpec {
    int n_functionalities = 4;
    int variants_per_functionality = 10;
    std::uint64_t seed = 20240101;
};

struct SynthCorpus {
    FragmentStore store;
    std::vector<FragmentPair> pairs;                   // all labeled pairs
    std::map<std::string, std::string> functionality;  // fragment id -> tag
};

/// Deterministic desk-scale clone corpus: small Java methods per
/// functionality template with seeded identifier renaming, statement
/// insertion and loop-form swaps. True pairs share a functionality tag.
SynthCorpus gen_synthetic_corpus(const SynthSpec& spec);

int max_synth_functionalities();

void save_synth_manifest(const std::string& path, const SynthSpec& spec,
                         const SynthCorpus& corpus);

}  // namespace faast
