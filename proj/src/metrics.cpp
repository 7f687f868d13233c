#include "efs/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "efs/error.hpp"

namespace efs {

double rmse(const VectorRef& y, const VectorRef& y_hat)
{
    if (y.size() != y_hat.size() || y.size() == 0) {
        fail(ErrorCode::LengthMismatch, "rmse needs two non-empty vectors of equal length");
    }
    return std::sqrt((y - y_hat).squaredNorm() / static_cast<double>(y.size()));
}

Stability stability(const std::vector<std::vector<std::size_t>>& sets, std::size_t n)
{
    if (sets.size() < 2) fail(ErrorCode::InvalidArgument, "stability needs at least two sets");
    if (n == 0) fail(ErrorCode::InvalidArgument, "stability needs at least one feature");
    const auto M = static_cast<double>(sets.size());
    std::vector<double> freq(n, 0.0);
    double kbar = 0.0;
    for (const auto& s : sets) {
        std::vector<bool> seen(n, false);
        for (auto j : s) {
            if (j >= n) fail(ErrorCode::InvalidArgument, "feature index out of range");
            if (seen[j]) fail(ErrorCode::InvalidArgument, "feature listed twice in one set");
            seen[j] = true;
            freq[j] += 1.0;
        }
        kbar += static_cast<double>(s.size());
    }
    kbar /= M;

    Stability out;
    const double q = kbar / static_cast<double>(n);
    if (q <= 0.0 || q >= 1.0) {
        out.degenerate = true;
        return out;
    }
    double variance = 0.0;
    for (double f : freq) {
        const double p = f / M;
        variance += M / (M - 1.0) * p * (1.0 - p);
    }
    variance /= static_cast<double>(n);
    out.raw = 1.0 - variance / (q * (1.0 - q));
    out.value = std::clamp(out.raw, 0.0, 1.0);
    return out;
}

Redundancy redundancy_rate(const MatrixRef& X, const std::vector<std::size_t>& S)
{
    if (S.empty()) fail(ErrorCode::EmptySelection, "redundancy needs a non-empty selection");
    Redundancy out;
    if (S.size() == 1) return out;

    std::vector<Eigen::VectorXd> centered;
    std::vector<double> norms;
    for (auto j : S) {
        if (j >= static_cast<std::size_t>(X.cols())) fail(ErrorCode::InvalidArgument, "feature index out of range");
        const auto col = X.col(static_cast<Eigen::Index>(j));
        Eigen::VectorXd c = col.array() - col.mean();
        norms.push_back(c.norm());
        centered.push_back(std::move(c));
    }
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < S.size(); ++a) {
        for (std::size_t b = a + 1; b < S.size(); ++b) {
            if (norms[a] == 0.0 || norms[b] == 0.0) {
                ++out.skipped_pairs;
                continue;
            }
            sum += std::min(1.0, std::abs(centered[a].dot(centered[b])) / (norms[a] * norms[b]));
            ++pairs;
        }
    }
    out.value = pairs == 0 ? 0.0 : sum / static_cast<double>(pairs);
    return out;
}

double perc(const std::vector<std::size_t>& S, const std::vector<std::size_t>& elevated)
{
    if (S.empty()) fail(ErrorCode::EmptySelection, "PERC needs a non-empty selection");
    std::size_t hits = 0;
    for (auto j : S) hits += std::find(elevated.begin(), elevated.end(), j) != elevated.end() ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(S.size());
}

std::string to_string(Sign s)
{
    switch (s) {
    case Sign::always_pos: return "++";
    case Sign::mostly_pos: return "+";
    case Sign::mostly_neg: return "-";
    case Sign::always_neg: return "--";
    case Sign::even:
    case Sign::never_selected: return "";
    }
    return "";
}

Sign sign_summary(const std::vector<std::optional<double>>& coefficients)
{
    std::size_t pos = 0;
    std::size_t neg = 0;
    std::size_t selected = 0;
    for (const auto& c : coefficients) {
        if (!c) continue;
        ++selected;
        if (*c > 0.0) ++pos;
        if (*c < 0.0) ++neg;
    }
    if (selected == 0) return Sign::never_selected;
    if (pos == selected) return Sign::always_pos;
    if (neg == selected) return Sign::always_neg;
    if (pos > neg) return Sign::mostly_pos;
    if (neg > pos) return Sign::mostly_neg;
    return Sign::even;
}

} // namespace efs
