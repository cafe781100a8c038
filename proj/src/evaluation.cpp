#include "patternforge/evaluation.hpp"

#include "patternforge/random.hpp"

namespace patternforge {

Fingerprint fingerprint_of(std::span<const grid_index> indices) {
    const auto len = static_cast<std::uint64_t>(indices.size());
    std::uint64_t a = 0x9E3779B97F4A7C15ULL ^ (len * 0xBF58476D1CE4E5B9ULL);
    std::uint64_t b = 0x94D049BB133111EBULL + len;
    for (grid_index v : indices) {
        const auto u = static_cast<std::uint64_t>(v);
        a = detail::mix64(a ^ u);
        b = detail::mix64(b + u);
    }
    a = detail::mix64(a);
    b = detail::mix64(b ^ a);
    return Fingerprint{a, b};
}

nlohmann::json to_json(const BagReport &r) {
    nlohmann::json j;
    j["n"] = r.n;
    j["e_f"] = r.e_f;
    j["gamma_f"] = r.gamma_f;
    j["e_min"] = r.e_min;
    j["e_max"] = r.e_max;
    j["gamma_min"] = r.gamma_min;
    j["gamma_max"] = r.gamma_max;
    j["gamma"] = r.gamma;
    j["e_p"] = r.e_p ? nlohmann::json(*r.e_p) : nlohmann::json(nullptr);
    j["e_p_star"] =
        r.e_p_star ? nlohmann::json(*r.e_p_star) : nlohmann::json(nullptr);
    j["eta"] = r.eta;
    j["eta_star"] = r.eta_star;
    return j;
}

MetricAccumulator::MetricAccumulator(grid_index k_grid,
                                     std::uint64_t eta_limit)
    : k_grid_(k_grid), eta_limit_(eta_limit) {
    if (k_grid < 1)
        fail(errc::invalid_config, "accumulator needs a positive grid size");
    hits_.assign(static_cast<std::size_t>(k_grid), 0);
    hits_star_.assign(static_cast<std::size_t>(k_grid), 0);
}

void MetricAccumulator::add(const Pattern &p, const PatternVerdict &v,
                            const DerivedParams &d, std::uint64_t ordinal) {
    if (p.k_grid() != k_grid_)
        fail(errc::grid_mismatch,
             "pattern grid does not match the accumulator grid");
    ++n_;

    const double count_err =
        static_cast<double>(d.k_req - static_cast<grid_index>(p.size())) /
        static_cast<double>(d.k_req);
    sum_ef_.add(count_err * count_err);
    sum_emin_.add(v.frac_under * v.frac_under);
    sum_emax_.add(v.frac_over * v.frac_over);
    viol_count_ += v.gamma_f ? 1 : 0;
    viol_min_ += v.gamma_min ? 1 : 0;
    viol_max_ += v.gamma_max ? 1 : 0;
    viol_any_ += v.gamma ? 1 : 0;

    const bool correct = !v.gamma;
    for (grid_index m : p.indices()) {
        const auto slot = static_cast<std::size_t>(m - 1);
        ++hits_[slot];
        if (correct)
            ++hits_star_[slot];
    }
    points_ += p.size();
    if (correct)
        points_star_ += p.size();

    if (ordinal < eta_limit_) {
        const Fingerprint f = fingerprint_of(p.indices());
        uniq_.insert(f);
        if (correct)
            uniq_star_.insert(f);
    }
}

void MetricAccumulator::merge(const MetricAccumulator &other) {
    if (other.k_grid_ != k_grid_)
        fail(errc::grid_mismatch, "cannot merge accumulators over different grids");
    n_ += other.n_;
    sum_ef_.merge(other.sum_ef_);
    sum_emin_.merge(other.sum_emin_);
    sum_emax_.merge(other.sum_emax_);
    viol_count_ += other.viol_count_;
    viol_min_ += other.viol_min_;
    viol_max_ += other.viol_max_;
    viol_any_ += other.viol_any_;
    for (std::size_t i = 0; i < hits_.size(); ++i) {
        hits_[i] += other.hits_[i];
        hits_star_[i] += other.hits_star_[i];
    }
    points_ += other.points_;
    points_star_ += other.points_star_;
    uniq_.insert(other.uniq_.begin(), other.uniq_.end());
    uniq_star_.insert(other.uniq_star_.begin(), other.uniq_star_.end());
}

namespace {

std::optional<double> density_error(const std::vector<std::uint64_t> &hits,
                                    std::uint64_t points,
                                    grid_index k_grid) {
    if (points == 0)
        return std::nullopt;
    const double scale =
        static_cast<double>(k_grid) / static_cast<double>(points);
    KahanSum sum;
    for (std::uint64_t h : hits) {
        const double dev = scale * static_cast<double>(h) - 1.0;
        sum.add(dev * dev);
    }
    return sum.value() / static_cast<double>(k_grid);
}

} // namespace

BagReport MetricAccumulator::finalize() const {
    if (n_ == 0)
        fail(errc::empty_accumulator, "no patterns were accumulated");
    BagReport r;
    r.n = n_;
    const auto nd = static_cast<double>(n_);
    r.e_f = sum_ef_.value() / nd;
    r.e_min = sum_emin_.value() / nd;
    r.e_max = sum_emax_.value() / nd;
    r.gamma_f = static_cast<double>(viol_count_) / nd;
    r.gamma_min = static_cast<double>(viol_min_) / nd;
    r.gamma_max = static_cast<double>(viol_max_) / nd;
    r.gamma = static_cast<double>(viol_any_) / nd;
    r.e_p = density_error(hits_, points_, k_grid_);
    r.e_p_star = density_error(hits_star_, points_star_, k_grid_);
    r.eta = uniq_.size();
    r.eta_star = uniq_star_.size();
    return r;
}

std::vector<double> MetricAccumulator::density(bool starred) const {
    const auto &hits = starred ? hits_star_ : hits_;
    const std::uint64_t points = starred ? points_star_ : points_;
    if (points == 0)
        return {};
    const double scale =
        static_cast<double>(k_grid_) / static_cast<double>(points);
    std::vector<double> out(hits.size());
    for (std::size_t i = 0; i < hits.size(); ++i)
        out[i] = scale * static_cast<double>(hits[i]);
    return out;
}

BagReport evaluate_bag(const PatternBag &bag, std::uint64_t eta_limit) {
    MetricAccumulator acc(bag.derived.k_grid, eta_limit);
    for (std::size_t i = 0; i < bag.patterns.size(); ++i)
        acc.add(bag.patterns[i], bag.verdicts[i], bag.derived,
                static_cast<std::uint64_t>(i));
    return acc.finalize();
}

ConvergenceCheckpoint checkpoint_of(const BagReport &r) {
    ConvergenceCheckpoint c;
    c.n = r.n;
    c.e_f = r.e_f;
    c.e_min = r.e_min;
    c.e_max = r.e_max;
    c.gamma = r.gamma;
    c.e_p = r.e_p.value_or(0.0);
    return c;
}

namespace {

bool metric_settled(double prev, double cur, double rel_tol) {
    if (cur == 0.0)
        return prev == 0.0;
    return std::abs(cur - prev) <= rel_tol * std::abs(cur);
}

} // namespace

bool checkpoints_converged(const ConvergenceCheckpoint &prev,
                           const ConvergenceCheckpoint &cur, double rel_tol) {
    return metric_settled(prev.e_f, cur.e_f, rel_tol) &&
           metric_settled(prev.e_min, cur.e_min, rel_tol) &&
           metric_settled(prev.e_max, cur.e_max, rel_tol) &&
           metric_settled(prev.gamma, cur.gamma, rel_tol) &&
           metric_settled(prev.e_p, cur.e_p, rel_tol);
}

} // namespace patternforge
