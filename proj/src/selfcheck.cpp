#include <cmath>
#include <sstream>

#include "octens/blocks.hpp"
#include "octens/error.hpp"

namespace octens::blocks {

namespace {

constexpr double kEquivTol = 1e-9;
constexpr double kRowSumTol = 1e-12;

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(3);
    ss << std::scientific << v;
    return ss.str();
}

// Per-token value then output projection: what attention reduces to when each
// group is a single token.
Matrix per_token_projection(const FeatureMap& x, const AttentionParams& p) {
    return x.tokens() * p.value * p.output;
}

bool tokens_differ(const FeatureMap& a, const FeatureMap& b, int row) {
    return (a.tokens().row(row) - b.tokens().row(row)).cwiseAbs().maxCoeff() > 1e-14;
}

}  // namespace

std::vector<CheckOutcome> selfcheck(std::uint64_t seed, int size, const std::optional<std::vector<double>>& weights) {
    require(size >= 2 && size % 2 == 0, "selfcheck size must be even and >= 2");
    const int c = kSelfcheckChannels, h = kSelfcheckHeads;
    auto params = [&](int window, int grid) {
        return weights ? AttentionParams::from_values(c, h, window, grid, *weights)
                       : AttentionParams::seeded(c, h, window, grid, seed);
    };
    const FeatureMap x = FeatureMap::random(size, size, c, seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<CheckOutcome> out;
    auto record = [&](std::string name, bool ok, std::string detail) {
        out.push_back({std::move(name), ok, std::move(detail)});
    };

    const auto full = params(size, size);
    const FeatureMap dense = dense_attention(x, full);

    {
        double worst = 0.0;
        for (const auto& m : attention_maps(x, full))
            for (Eigen::Index r = 0; r < m.rows(); ++r) worst = std::max(worst, std::abs(m.row(r).sum() - 1.0));
        record("softmax_rows_sum_to_one", worst <= kRowSumTol, "max deviation " + fmt(worst));
    }
    {
        const double e = max_relative_error(block_attention(x, full).tokens(), dense.tokens());
        record("block_full_window_equals_dense", e <= kEquivTol, "relative error " + fmt(e));
    }
    {
        const double e = max_relative_error(grid_attention(x, full).tokens(), dense.tokens());
        record("grid_full_grid_equals_dense", e <= kEquivTol, "relative error " + fmt(e));
    }
    {
        const auto unit = params(1, 1);
        const Matrix want = per_token_projection(x, unit);
        const double eb = max_relative_error(block_attention(x, unit).tokens(), want);
        const double eg = max_relative_error(grid_attention(x, unit).tokens(), want);
        record("unit_groups_reduce_to_projection", eb <= kEquivTol && eg <= kEquivTol,
               "block " + fmt(eb) + ", grid " + fmt(eg));
    }
    const auto local = params(2, 2);
    {
        // every 2x2 window attended on its own
        const FeatureMap got = block_attention(x, local);
        double worst = 0.0;
        for (int wy = 0; wy < size; wy += 2)
            for (int wx = 0; wx < size; wx += 2) {
                FeatureMap win(2, 2, c);
                for (int dy = 0; dy < 2; ++dy)
                    for (int dx = 0; dx < 2; ++dx) win.tokens().row(dy * 2 + dx) = x.token(wy + dy, wx + dx);
                const FeatureMap y = dense_attention(win, local);
                for (int dy = 0; dy < 2; ++dy)
                    for (int dx = 0; dx < 2; ++dx) {
                        const double d = (got.token(wy + dy, wx + dx) - y.tokens().row(dy * 2 + dx)).cwiseAbs().maxCoeff();
                        worst = std::max(worst, d);
                    }
            }
        record("block_matches_per_window_dense", worst <= kEquivTol, "max abs error " + fmt(worst));
    }
    {
        const FeatureMap got = grid_attention(x, local);
        const int stride = size / 2;
        double worst = 0.0;
        for (int ry = 0; ry < stride; ++ry)
            for (int rx = 0; rx < stride; ++rx) {
                FeatureMap group(2, 2, c);
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b) group.tokens().row(a * 2 + b) = x.token(ry + a * stride, rx + b * stride);
                const FeatureMap y = dense_attention(group, local);
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b) {
                        const double d =
                            (got.token(ry + a * stride, rx + b * stride) - y.tokens().row(a * 2 + b)).cwiseAbs().maxCoeff();
                        worst = std::max(worst, d);
                    }
            }
        record("grid_matches_per_group_dense", worst <= kEquivTol, "max abs error " + fmt(worst));
    }
    if (size >= 4) {
        // A change at token (0,0) stays inside its window under block attention
        // and reaches every token after max_sa once window * grid covers the map.
        const auto spanning = params(2, size / 2);
        FeatureMap bumped = x;
        bumped.tokens().row(0).array() += 1.0;
        const FeatureMap b0 = block_attention(x, spanning), b1 = block_attention(bumped, spanning);
        const FeatureMap m0 = max_sa(x, spanning), m1 = max_sa(bumped, spanning);
        bool contained = true, global = true;
        for (int y = 0; y < size; ++y)
            for (int xx = 0; xx < size; ++xx) {
                const int row = y * size + xx;
                const bool in_window = y < 2 && xx < 2;
                if (!in_window && tokens_differ(b0, b1, row)) contained = false;
                if (!tokens_differ(m0, m1, row)) global = false;
            }
        record("max_sa_mixes_globally", contained && global,
               std::string("block contained: ") + (contained ? "yes" : "no") + ", max_sa global: " + (global ? "yes" : "no"));
    }
    {
        // swapping two whole windows swaps the outputs
        FeatureMap swapped = x;
        const int last = size - 2;
        for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
                swapped.tokens().row(dy * size + dx) = x.token(last + dy, last + dx);
                swapped.tokens().row((last + dy) * size + last + dx) = x.token(dy, dx);
            }
        const FeatureMap a = block_attention(x, local), b = block_attention(swapped, local);
        double worst = 0.0;
        for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
                worst = std::max(worst, (a.token(dy, dx) - b.token(last + dy, last + dx)).cwiseAbs().maxCoeff());
                worst = std::max(worst, (a.token(last + dy, last + dx) - b.token(dy, dx)).cwiseAbs().maxCoeff());
            }
        record("block_window_permutation_equivariant", worst <= kEquivTol, "max abs error " + fmt(worst));
    }
    {
        // doubling the token count: 4x for dense, 2x for max_sa
        const auto cost = [&](AttentionVariant v, int w) {
            return static_cast<double>(attention_op_count(size, w, c, h, v, 2, 2));
        };
        const double dense_ratio = cost(AttentionVariant::Dense, 2 * size) / cost(AttentionVariant::Dense, size);
        const double sparse_ratio = cost(AttentionVariant::MaxSa, 2 * size) / cost(AttentionVariant::MaxSa, size);
        record("op_count_quadratic_vs_linear", dense_ratio == 4.0 && sparse_ratio == 2.0,
               "dense ratio " + std::to_string(dense_ratio) + ", max_sa ratio " + std::to_string(sparse_ratio));
    }
    {
        const ConvBlockParams zero = ConvBlockParams::zeros(c, c, 2, 2);
        const FeatureMap se = se_block(x, SeParams{c, 2, Matrix::Zero(c, c / 2), Matrix::Zero(c / 2, c)});
        const double e_se = (se.tokens() - 0.5 * x.tokens()).cwiseAbs().maxCoeff();
        record("se_zero_gate_halves_input", e_se == 0.0, "max abs error " + fmt(e_se));
        if (size >= 3) {
            const double e_mb = (mbconv(x, zero).tokens() - x.tokens()).cwiseAbs().maxCoeff();
            const double e_fu = (fused_mbconv(x, zero).tokens() - x.tokens()).cwiseAbs().maxCoeff();
            record("mbconv_zero_weights_residual_identity", e_mb <= 1e-12 && e_fu <= 1e-12,
                   "mbconv " + fmt(e_mb) + ", fused " + fmt(e_fu));
        }
    }
    {
        const bool same = max_sa(x, local).tokens() == max_sa(x, params(2, 2)).tokens();
        record("max_sa_deterministic", same, same ? "identical" : "outputs differ");
    }
    return out;
}

}  // namespace octens::blocks
