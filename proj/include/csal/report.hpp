#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "csal/evaluation.hpp"
#include "csal/learner.hpp"
#include "csal/problems.hpp"

namespace csal {

using ojson = nlohmann::ordered_json;

// 16-hex-digit FNV-1a fingerprint of the problem's canonical descriptor.
std::string problem_hash(const Problem& p);

// Step trace, one row per step:
// t,used,action,depth,index,unclassified,classified,max_depth
std::string trace_csv(std::span<const StepRecord> steps);

// Pinned replicate schema:
// budget,replicate,seed,excess_risk,max_depth,classified_mass,
// queries_total,queries_per_label
// queries_per_label holds semicolon-joined per-label counts.
std::string replicate_csv(std::span<const ReplicateRow> rows);

// Per-leaf records of a final state; +-infinity bounds serialize as null.
ojson leaves_json(const LearnerState& s);

ojson run_report(const Problem& p, const LearnerParams& params,
                 std::uint64_t seed, const LearnerState& s,
                 const RiskEstimate& risk, double classified_mass_value);

ojson sweep_report(const Problem& p, const LearnerParams& base,
                   const SweepOptions& opt, const SweepResult& result);

ojson validation_report(const Problem& p,
                        const std::vector<CheckResult>& checks);

// Write content to path, creating parent directories. Throws
// std::runtime_error on I/O failure.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace csal
