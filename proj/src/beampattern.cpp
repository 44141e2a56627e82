#include "hdoa/beampattern.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "hdoa/crlb.hpp"
#include "hdoa/errors.hpp"
#include "hdoa/kernels.hpp"
#include "hdoa/rng.hpp"

namespace hdoa {

SelectionStrategy parse_strategy(const std::string& name)
{
    if (name == "exhaustive") return SelectionStrategy::Exhaustive;
    if (name == "greedy_swap" || name == "greedy") return SelectionStrategy::GreedySwap;
    throw Error(ErrorCode::Usage, "unknown selection strategy '" + name + "'");
}

std::string to_string(SelectionStrategy s)
{
    return s == SelectionStrategy::Exhaustive ? "exhaustive" : "greedy_swap";
}

std::vector<double> SelectionConfig::grid_deg() const
{
    require(grid_step_deg > 0.0 && grid_max_deg >= grid_min_deg, ErrorCode::InvalidArgument,
            "PSL scan grid is empty");
    const auto n = static_cast<std::size_t>(std::floor((grid_max_deg - grid_min_deg) / grid_step_deg + 1e-9)) + 1;
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = grid_min_deg + grid_step_deg * static_cast<double>(i);
    return g;
}

double SelectionConfig::mainlobe_halfwidth(int chains) const
{
    if (mainlobe_halfwidth_deg) return *mainlobe_halfwidth_deg;
    return 102.0 / std::max(1, chains);
}

std::vector<double> beampattern(const SelectionVector& selection, double theta_m, std::span<const double> grid_rad)
{
    const auto idx = selection.indices();
    return kernels::parallel::beampattern(idx, theta_m, grid_rad);
}

PslResult psl(const SelectionVector& selection, double theta_m, const SelectionConfig& cfg)
{
    const int k = selection.chain_count();
    require(k >= 1, ErrorCode::EmptySelection, "PSL of an empty selection");
    PslResult out;
    if (k == 1) {
        out.value = 1.0;
        return out;
    }
    const auto grid = cfg.grid_deg();
    std::vector<double> grid_rad(grid.size());
    std::transform(grid.begin(), grid.end(), grid_rad.begin(), deg2rad);
    const auto b = beampattern(selection, theta_m, grid_rad);
    const double hw = cfg.mainlobe_halfwidth(k);
    const double theta_m_deg = rad2deg(theta_m);
    std::vector<std::uint8_t> mask(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) mask[g] = std::abs(grid[g] - theta_m_deg) < hw ? 1 : 0;
    const double side = kernels::peak_sidelobe(b, mask);
    if (side < 0.0) {
        out.degenerate = true;
        return out;
    }
    for (std::size_t g = 0; g < grid.size(); ++g)
        if (!mask[g] && b[g] == side) {
            out.sidelobe_deg = grid[g];
            break;
        }
    const double ratio = std::min(1.0, side / k);
    out.value = ratio * ratio;
    return out;
}

SelectionVector boundary_template(int m, int chains)
{
    require(chains >= 1 && chains <= m, ErrorCode::InvalidArgument, "template needs 1 <= K <= M");
    const int low = (chains + 1) / 2;
    const int high = chains / 2;
    std::vector<int> idx;
    for (int i = 1; i <= low; ++i) idx.push_back(i);
    for (int i = m - high + 1; i <= m; ++i) idx.push_back(i);
    return SelectionVector::from_indices(m, idx);
}

namespace {

struct Moments {
    double s1 = 0.0;
    double s2 = 0.0;
};

Moments moments(std::span<const int> idx)
{
    Moments mo;
    for (int p : idx) {
        mo.s1 += p;
        mo.s2 += static_cast<double>(p) * p;
    }
    return mo;
}

double objective_of(const Moments& mo, int k) { return k * mo.s2 - mo.s1 * mo.s1; }

double swapped_objective(const Moments& mo, int k, kernels::Swap s)
{
    Moments n = mo;
    n.s1 += s.in - s.out;
    n.s2 += static_cast<double>(s.in) * s.in - static_cast<double>(s.out) * s.out;
    return objective_of(n, k);
}

/// Evaluates sidelobe power ratios for selections of a fixed size on one scan table.
class PslEvaluator {
public:
    PslEvaluator(int m, double theta_deg, const SelectionConfig& cfg, int chains)
        : table_(m, theta_deg, cfg.grid_deg(), cfg.mainlobe_halfwidth(chains)), k_(chains)
    {
    }

    double of(std::span<const int> idx) const
    {
        if (k_ == 1) return 1.0;
        const auto sum = table_.pattern_sum(idx);
        std::vector<double> mag(sum.size());
        for (std::size_t g = 0; g < sum.size(); ++g) mag[g] = std::abs(sum[g]);
        return to_ratio(kernels::peak_sidelobe(mag, table_.in_mainlobe));
    }

    std::vector<double> of_swaps(std::span<const int> idx, std::span<const kernels::Swap> swaps) const
    {
        if (k_ == 1) return std::vector<double>(swaps.size(), 1.0);
        const auto sum = table_.pattern_sum(idx);
        auto side = kernels::parallel::swap_sidelobes(table_, sum, swaps);
        for (auto& v : side) v = to_ratio(v);
        return side;
    }

private:
    double to_ratio(double side) const
    {
        if (side < 0.0) return 0.0;
        const double r = std::min(1.0, side / k_);
        return r * r;
    }

    kernels::ScanTable table_;
    int k_;
};

struct Candidate {
    std::vector<int> idx;  // sorted
    double objective = -1.0;
    double psl = 1.0;
};

bool better(const Candidate& a, const Candidate& b)
{
    if (a.objective != b.objective) return a.objective > b.objective;
    return a.idx < b.idx;
}

std::vector<kernels::Swap> all_swaps(std::span<const int> idx, int m)
{
    std::vector<std::uint8_t> in(static_cast<std::size_t>(m) + 1, 0);
    for (int p : idx) in[static_cast<std::size_t>(p)] = 1;
    std::vector<kernels::Swap> swaps;
    swaps.reserve(idx.size() * static_cast<std::size_t>(m));
    for (int out : idx)
        for (int cand = 1; cand <= m; ++cand)
            if (!in[static_cast<std::size_t>(cand)]) swaps.push_back({out, cand});
    return swaps;
}

void apply(std::vector<int>& idx, kernels::Swap s)
{
    *std::find(idx.begin(), idx.end(), s.out) = s.in;
    std::sort(idx.begin(), idx.end());
}

/// One greedy run: repair feasibility by PSL descent, then climb the objective
/// with the best feasible single swap. Returns nullopt when repair stalls.
std::optional<Candidate> greedy_run(std::vector<int> idx, int m, double delta, const PslEvaluator& eval,
                                    double& min_psl_seen)
{
    const int k = static_cast<int>(idx.size());
    const bool inert = delta >= 1.0;
    double cur_psl = inert ? 0.0 : eval.of(idx);
    min_psl_seen = std::min(min_psl_seen, cur_psl);

    while (cur_psl > delta) {
        const auto swaps = all_swaps(idx, m);
        const auto p = eval.of_swaps(idx, swaps);
        const Moments mo = moments(idx);
        std::size_t best = 0;
        for (std::size_t i = 1; i < swaps.size(); ++i) {
            if (p[i] < p[best] ||
                (p[i] == p[best] && swapped_objective(mo, k, swaps[i]) > swapped_objective(mo, k, swaps[best])))
                best = i;
        }
        if (p[best] >= cur_psl) return std::nullopt;
        apply(idx, swaps[best]);
        cur_psl = p[best];
        min_psl_seen = std::min(min_psl_seen, cur_psl);
    }

    constexpr std::size_t kChunk = 64;
    for (;;) {
        const Moments mo = moments(idx);
        const double cur_obj = objective_of(mo, k);
        auto swaps = all_swaps(idx, m);
        std::vector<std::pair<double, kernels::Swap>> up;
        for (const auto& s : swaps) {
            const double o = swapped_objective(mo, k, s);
            if (o > cur_obj) up.emplace_back(o, s);
        }
        if (up.empty()) break;
        std::stable_sort(up.begin(), up.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

        std::optional<std::pair<kernels::Swap, double>> chosen;
        for (std::size_t start = 0; start < up.size() && !chosen; start += kChunk) {
            const std::size_t end = std::min(up.size(), start + kChunk);
            std::vector<kernels::Swap> chunk;
            for (std::size_t i = start; i < end; ++i) chunk.push_back(up[i].second);
            const auto p = inert ? std::vector<double>(chunk.size(), 0.0) : eval.of_swaps(idx, chunk);
            for (std::size_t i = 0; i < chunk.size(); ++i)
                if (p[i] <= delta) {
                    chosen = {chunk[i], p[i]};
                    break;
                }
        }
        if (!chosen) break;
        apply(idx, chosen->first);
        cur_psl = chosen->second;
    }
    Candidate c;
    c.idx = idx;
    c.objective = objective_of(moments(idx), k);
    c.psl = inert ? eval.of(idx) : cur_psl;
    return c;
}

double binomial(int n, int k)
{
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

Candidate exhaustive(int m, int k, double delta, const PslEvaluator& eval, double& min_psl_seen)
{
    require(binomial(m, k) <= 1e6, ErrorCode::InvalidArgument,
            "exhaustive selection limited to C(M,K) <= 1e6");
    Candidate best;
    std::vector<int> idx(static_cast<std::size_t>(k));
    std::iota(idx.begin(), idx.end(), 1);
    for (;;) {
        const double obj = objective_of(moments(idx), k);
        // Lexicographic enumeration: an equal objective found later never wins the tie.
        if (obj > best.objective) {
            const double p = eval.of(idx);
            min_psl_seen = std::min(min_psl_seen, p);
            if (p <= delta) {
                best.idx = idx;
                best.objective = obj;
                best.psl = p;
            }
        }
        int i = k - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == m - k + i + 1) --i;
        if (i < 0) break;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
    return best;
}

}  // namespace

SelectionOutcome constrained_select_detail(double theta, const SelectionConfig& cfg, const ArrayGeometry& geometry,
                                           int chains)
{
    const int m = geometry.size();
    require(geometry.indices().front() == 1 && geometry.contiguous(), ErrorCode::InvalidArgument,
            "antenna selection runs on the full ULA {1..M}");
    require(chains >= 1 && chains <= m, ErrorCode::InvalidArgument, "selection needs 1 <= K <= M");
    require(cfg.delta >= 0.0 && cfg.delta <= 1.0, ErrorCode::InvalidArgument, "delta must lie in [0, 1]");
    require(cfg.restarts >= 0, ErrorCode::InvalidArgument, "restarts must be >= 0");

    const PslEvaluator eval(m, rad2deg(theta), cfg, chains);
    double min_psl = std::numeric_limits<double>::infinity();
    Candidate best;

    if (cfg.strategy == SelectionStrategy::Exhaustive) {
        best = exhaustive(m, chains, cfg.delta, eval, min_psl);
    } else {
        std::vector<std::vector<int>> starts{boundary_template(m, chains).indices()};
        for (int r = 0; r < cfg.restarts; ++r) {
            Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(r)));
            std::vector<int> pool(static_cast<std::size_t>(m));
            std::iota(pool.begin(), pool.end(), 1);
            // Partial Fisher-Yates with an explicit index draw keeps the stream portable.
            for (int i = 0; i < chains; ++i) {
                const auto j = i + static_cast<int>(rng() % static_cast<std::uint64_t>(m - i));
                std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
            }
            std::vector<int> s(pool.begin(), pool.begin() + chains);
            std::sort(s.begin(), s.end());
            starts.push_back(std::move(s));
        }
        for (const auto& s : starts) {
            const auto c = greedy_run(s, m, cfg.delta, eval, min_psl);
            if (c && (best.idx.empty() || better(*c, best))) best = *c;
        }
    }
    if (best.idx.empty())
        throw InfeasibleSelectionError("no selection meets PSL <= " + std::to_string(cfg.delta), min_psl);
    return {SelectionVector::from_indices(m, best.idx), best.objective, best.psl};
}

SelectionVector constrained_select(double theta, const SelectionConfig& cfg, const ArrayGeometry& geometry,
                                   int chains)
{
    return constrained_select_detail(theta, cfg, geometry, chains).selection;
}

}  // namespace hdoa
