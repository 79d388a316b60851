#pragma once
// Random ensemble instances whose combined scores can be thresholded exactly in
// integer arithmetic, so an oracle can evaluate any lattice weight vector
// without floating-point ties.
//
// Scores are (6j + 1) / 600 for integer j in [0, 99]. For integer weights i
// with sum(i) = m, the combined score is N / (600 m) where
// N = 6 sum_k i_k j_k + m. It equals the 0.5 threshold only if 6X = 299 m,
// which needs 6 | m. That rules out the step 0.05 lattice (m = 20) and
// uniform weights over 2..5 branches (i = 1, m = n).

#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "octens/ensemble.hpp"
#include "oracles.hpp"

namespace synth {

struct Instance {
    int branches = 0;
    int samples = 0;
    std::vector<std::vector<std::array<int, 6>>> j;  // [branch][sample][label]
    std::vector<std::vector<int>> truth;             // [sample][label]
};

inline Instance random_instance(std::mt19937_64& gen, int max_branches, int max_samples) {
    Instance in;
    in.branches = std::uniform_int_distribution<int>(2, max_branches)(gen);
    in.samples = std::uniform_int_distribution<int>(2, max_samples)(gen);
    std::uniform_int_distribution<int> score(0, 99);
    std::bernoulli_distribution pos(std::uniform_real_distribution<double>(0.2, 0.6)(gen));
    in.j.assign(static_cast<std::size_t>(in.branches), std::vector<std::array<int, 6>>(static_cast<std::size_t>(in.samples)));
    for (auto& b : in.j)
        for (auto& row : b)
            for (int& v : row) v = score(gen);
    in.truth.assign(static_cast<std::size_t>(in.samples), std::vector<int>(6));
    for (auto& row : in.truth)
        for (int& v : row) v = pos(gen) ? 1 : 0;
    return in;
}

inline std::string sample_id(int i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "s%05d", i);
    return buf;
}

inline octens::ValidationSet to_validation_set(const Instance& in) {
    std::vector<std::string> ids;
    for (int i = 0; i < in.samples; ++i) ids.push_back(sample_id(i));
    std::vector<octens::Branch> branches;
    for (int k = 0; k < in.branches; ++k) {
        std::vector<octens::ScoreRow> rows;
        for (const auto& r : in.j[static_cast<std::size_t>(k)]) {
            octens::ScoreRow s{};
            for (int c = 0; c < 6; ++c) s[static_cast<std::size_t>(c)] = (6.0 * r[static_cast<std::size_t>(c)] + 1.0) / 600.0;
            rows.push_back(s);
        }
        branches.push_back({"b" + std::to_string(k), octens::ScoreMatrix(ids, rows)});
    }
    std::vector<octens::LabelRow> truth;
    for (const auto& r : in.truth) {
        octens::LabelRow l{};
        for (int c = 0; c < 6; ++c) l[static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(r[static_cast<std::size_t>(c)]);
        truth.push_back(l);
    }
    return octens::make_validation_set(std::move(branches), octens::LabelMatrix(ids, truth));
}

// Exact macro F1 of the ensemble with integer weights `units` (sum m).
inline double objective(const Instance& in, const std::vector<int>& units) {
    int m = 0;
    for (int u : units) m += u;
    std::vector<std::vector<int>> pred(static_cast<std::size_t>(in.samples), std::vector<int>(6));
    for (int i = 0; i < in.samples; ++i)
        for (int c = 0; c < 6; ++c) {
            long n = 0;
            for (int k = 0; k < in.branches; ++k)
                n += static_cast<long>(units[static_cast<std::size_t>(k)]) *
                     (6L * in.j[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] + 1);
            pred[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] = 2 * n >= 600L * m ? 1 : 0;
        }
    return oracle::macro_f1(pred, in.truth);
}

}  // namespace synth
