#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "eegalign/harness/pipeline.hpp"
#include "eegalign/harness/report.hpp"
#include "eegalign/trial.hpp"

namespace eegalign::harness {

struct OnlineConfig {
    int m = 40;            // pool size
    int r = 4;             // trials added per step
    int first_batch = 4;   // labeled pool trials at the first checkpoint
    int repetitions = 30;
    std::uint64_t base_seed = 0;
};

void validate(const OnlineConfig& cfg);

// 1-based index of the i-th pool trial (i in 1..m), wrapping past N.
int pool_index(int n0, int i, int n_trials);

// n0 in [1, N] for a repetition; depends only on (base_seed + repetition).
int draw_n0(std::uint64_t base_seed, int repetition, int n_trials);

// first_batch, first_batch + r, ..., m.
std::vector<int> checkpoints(const OnlineConfig& cfg);

// Runs fn(0..n-1) on up to `threads` workers. Exceptions are rethrown after
// all workers stop, lowest index first.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

// Leave-one-subject-out. Every subject's reference comes from its own
// unlabeled trials (or resting epochs); no held-out label is read before
// scoring.
EvalReport loso_eval(const Dataset& dataset, const PipelineSpec& spec, std::uint64_t seed, int threads = 1);

EvalReport online_eval(const Dataset& dataset, const PipelineSpec& spec, const OnlineConfig& cfg,
                       int threads = 1);

}  // namespace eegalign::harness
