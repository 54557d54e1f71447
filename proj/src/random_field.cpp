#include "nlslab/random_field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>

#include "nlslab/errors.hpp"
#include "nlslab/parallel.hpp"
#include "nlslab/stats.hpp"

namespace nlslab {

CoefficientLaw CoefficientLaw::scaled(double c) {
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("scaled law needs a finite positive factor");
    CoefficientLaw law(Kind::scaled);
    law.scale_ = c;
    return law;
}

CoefficientLaw CoefficientLaw::custom(std::vector<double> table) {
    for (double a : table)
        if (!(a > 0.0) || !std::isfinite(a)) throw InvalidArgument("custom law entries must be finite and positive");
    CoefficientLaw law(Kind::custom);
    law.table_ = std::move(table);
    return law;
}

double CoefficientLaw::alpha(int n) const {
    if (n < 0) throw InvalidArgument("law index must be nonnegative");
    switch (kind_) {
    case Kind::mu0: return 1.0 / std::sqrt(2.0 * n + 1.0);
    case Kind::shifted: return 1.0 / std::sqrt(2.0 * n + 3.0);
    case Kind::scaled: return scale_ / std::sqrt(2.0 * n + 1.0);
    case Kind::custom:
        if (n >= static_cast<int>(table_.size())) throw InvalidArgument("custom law has no entry " + std::to_string(n));
        return table_[n];
    }
    return 0.0;
}

std::string CoefficientLaw::name() const {
    switch (kind_) {
    case Kind::mu0: return "mu0";
    case Kind::shifted: return "shifted";
    case Kind::scaled: {
        char buf[64];
        std::snprintf(buf, sizeof buf, "scaled:%.17g", scale_);
        return buf;
    }
    case Kind::custom: return "custom";
    }
    return "?";
}

CoefficientLaw parse_law(const std::string& spec) {
    if (spec == "mu0") return CoefficientLaw::mu0();
    if (spec == "shifted") return CoefficientLaw::shifted();
    if (spec.rfind("scaled:", 0) == 0) {
        try {
            return CoefficientLaw::scaled(std::stod(spec.substr(7)));
        } catch (const std::logic_error&) {
        }
    }
    throw InvalidArgument("unknown law '" + spec + "' (expected mu0, shifted, scaled:<c>)");
}

SpectralState sample(const CoefficientLaw& law, int modes, const SampleStream& stream) {
    if (modes < 1) throw InvalidArgument("sample: modes must be >= 1");
    SpectralState out = SpectralState::zero(modes);
    for (int n = 0; n < modes; ++n) out.coeffs[n] = law.alpha(n) * stream.complex_normal(static_cast<std::uint32_t>(n));
    return out;
}

std::vector<SpectralState> sample_ensemble(const CoefficientLaw& law, int modes, int count, const SampleStream& stream) {
    std::vector<SpectralState> out(count);
    parallel_for(count, [&](std::size_t j) { out[j] = sample(law, modes, stream.at(stream.index + j)); });
    return out;
}

// ---------------------------------------------------------------------------

std::string to_string(Equivalence v) {
    switch (v) {
    case Equivalence::equivalent: return "equivalent";
    case Equivalence::singular: return "singular";
    case Equivalence::inconclusive: return "inconclusive";
    }
    return "?";
}

EquivalenceReport equivalence_diagnostic(const CoefficientLaw& a, const CoefficientLaw& b, int terms) {
    if (terms < 16) throw InvalidArgument("equivalence_diagnostic: need at least 16 terms");
    EquivalenceReport report;
    report.ratio_sums.resize(terms);
    report.log_sums.resize(terms);
    std::vector<double> increments(terms);
    double ratio_acc = 0.0;
    double log_acc = 0.0;
    for (int n = 0; n < terms; ++n) {
        const double an = a.alpha(n);
        const double bn = b.alpha(n);
        if (!std::isfinite(an) || !std::isfinite(bn) || an <= 0.0 || bn <= 0.0)
            throw InvalidArgument("equivalence_diagnostic: non-finite coefficient at n = " + std::to_string(n));
        const double r = an / bn - 1.0;
        const double l = std::log(an) - std::log(bn);
        ratio_acc += r * r;
        log_acc += l * l;
        report.ratio_sums[n] = ratio_acc;
        report.log_sums[n] = log_acc;
        increments[n] = l * l;
    }

    // The verdict uses the log form, which is symmetric under swapping laws.
    const int begin = terms / 2;
    std::vector<double> xs, ys;
    bool all_zero = true;
    for (int n = begin; n < terms; ++n) {
        if (increments[n] > 0.0) {
            all_zero = false;
            xs.push_back(std::log(n + 1.0));
            ys.push_back(std::log(increments[n]));
        }
    }
    if (all_zero) {
        report.tail_slope = -std::numeric_limits<double>::infinity();
        report.verdict = Equivalence::equivalent;
        return report;
    }
    if (xs.size() < 2) {
        report.verdict = Equivalence::inconclusive;
        return report;
    }
    const LinearFit fit = least_squares(xs, ys);
    report.tail_slope = fit.slope;
    const double q = -fit.slope;
    if (q >= 1.2) {
        report.verdict = Equivalence::equivalent;
    } else if (q <= 0.8) {
        report.verdict = Equivalence::singular;
    } else {
        report.verdict = Equivalence::inconclusive;
    }
    return report;
}

// ---------------------------------------------------------------------------

double kolmogorov_survival(double lambda) {
    if (lambda < 1e-3) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-16 * std::abs(sum)) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw InvalidArgument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    KsResult r;
    r.statistic = d;
    r.p_value = kolmogorov_survival((ne + 0.12 + 0.11 / ne) * d);
    return r;
}

RotationReport rotation_invariance_test(double t, int modes, int samples, const SampleStream& stream,
                                        bool modulus_control) {
    if (samples < 1000) throw InvalidArgument("rotation_invariance_test: need at least 1000 samples");
    if (modes < 1) throw InvalidArgument("rotation_invariance_test: modes must be >= 1");
    const std::size_t total = static_cast<std::size_t>(samples) * modes;
    std::vector<double> ref_re(total), ref_mod(total), rot_re(total), rot_mod(total);
    parallel_for(samples, [&](std::size_t j) {
        const SampleStream s = stream.at(stream.index + j);
        for (int n = 0; n < modes; ++n) {
            cplx g = s.complex_normal(static_cast<std::uint32_t>(n), StreamTag::rotation_reference);
            cplx h = s.complex_normal(static_cast<std::uint32_t>(n), StreamTag::rotation_rotated);
            if (modulus_control) {
                g = std::abs(g);
                h = std::abs(h);
            }
            h *= std::polar(1.0, -(2.0 * n + 1.0) * t);
            const std::size_t k = j * modes + n;
            ref_re[k] = g.real();
            ref_mod[k] = std::abs(g);
            rot_re[k] = h.real();
            rot_mod[k] = std::abs(h);
        }
    });
    RotationReport report;
    report.real_parts = ks_two_sample(std::move(ref_re), std::move(rot_re));
    report.moduli = ks_two_sample(std::move(ref_mod), std::move(rot_mod));
    const KsResult& worst =
        report.real_parts.p_value <= report.moduli.p_value ? report.real_parts : report.moduli;
    report.statistic = worst.statistic;
    report.p_value = std::min(1.0, 2.0 * worst.p_value);  // Bonferroni over the two tests
    return report;
}

// ---------------------------------------------------------------------------

double sup_smoothed_norm(const SpectralState& u, const BasisTable& basis, double sigma, int t_points) {
    const int m = u.modes();
    if (m > basis.modes) throw InvalidArgument("sup_smoothed_norm: state larger than basis");
    Eigen::MatrixXd re(m, t_points), im(m, t_points);
    for (int k = 0; k < t_points; ++k) {
        const double t = -std::numbers::pi + 2.0 * std::numbers::pi * k / t_points;
        for (int n = 0; n < m; ++n) {
            const double lift = std::pow(2.0 * n + 1.0, 0.5 * sigma);
            const cplx c = lift * u.coeffs[n] * std::polar(1.0, -(2.0 * n + 1.0) * t);
            re(n, k) = c.real();
            im(n, k) = c.imag();
        }
    }
    const auto rows = basis.values.topRows(m);
    const Eigen::MatrixXd vr = rows.transpose() * re;
    const Eigen::MatrixXd vi = rows.transpose() * im;
    return (vr.array().square() + vi.array().square()).sqrt().maxCoeff();
}

TailReport smoothing_tail_experiment(const TailConfig& cfg, const std::vector<double>& R_grid, const SampleStream& stream) {
    if (!(cfg.sigma < 1.0 / 6.0)) throw InvalidArgument("smoothing_tail_experiment: sigma must be below 1/6");
    if (cfg.t_points < 8) throw InvalidArgument("smoothing_tail_experiment: need at least 8 time points");
    if (cfg.samples < 1) throw InvalidArgument("smoothing_tail_experiment: need samples");
    const BasisTable basis = build_basis(cfg.modes, cfg.nodes > 0 ? cfg.nodes : 2 * cfg.modes);
    const CoefficientLaw law = CoefficientLaw::mu0();

    TailReport report;
    report.sup_norms.resize(cfg.samples);
    parallel_for(cfg.samples, [&](std::size_t j) {
        const SpectralState u = sample(law, cfg.modes, stream.at(stream.index + j));
        report.sup_norms[j] = sup_smoothed_norm(u, basis, cfg.sigma, cfg.t_points);
    });
    report.median = median(report.sup_norms);

    const double M = cfg.samples;
    std::vector<double> xs, ys;
    for (double R : R_grid) {
        TailPoint pt;
        pt.R = R;
        const auto hits = std::count_if(report.sup_norms.begin(), report.sup_norms.end(), [&](double v) { return v >= R; });
        pt.tail = hits / M;
        pt.stderr_ = std::sqrt(pt.tail * (1.0 - pt.tail) / M);
        pt.censored = hits == 0;
        if (!pt.censored) {
            xs.push_back(R * R);
            ys.push_back(std::log(pt.tail));
        }
        report.points.push_back(pt);
    }
    report.fitted_points = static_cast<int>(xs.size());
    if (xs.size() >= 2) {
        const LinearFit fit = least_squares(xs, ys);
        report.slope = fit.slope;
        report.intercept = fit.intercept;
    }
    return report;
}

// ---------------------------------------------------------------------------

namespace {

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), 8);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

bool get_u64(std::istream& in, std::uint64_t& v) {
    unsigned char buf[8];
    if (!in.read(reinterpret_cast<char*>(buf), 8)) return false;
    v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return true;
}

double get_f64(std::istream& in) {
    std::uint64_t bits = 0;
    if (!get_u64(in, bits)) throw InvalidArgument("ensemble record truncated");
    return std::bit_cast<double>(bits);
}

} // namespace

void write_ensemble_header(std::ostream& out, const EnsembleHeader& header) {
    put_u64(out, header.modes);
    put_u64(out, header.law_id);
    put_u64(out, header.seed);
}

void write_ensemble_record(std::ostream& out, const EnsembleRecord& record) {
    put_u64(out, record.index);
    for (int n = 0; n < record.state.modes(); ++n) {
        put_f64(out, record.state.coeffs[n].real());
        put_f64(out, record.state.coeffs[n].imag());
    }
}

EnsembleHeader read_ensemble_header(std::istream& in) {
    EnsembleHeader h;
    if (!get_u64(in, h.modes) || !get_u64(in, h.law_id) || !get_u64(in, h.seed))
        throw InvalidArgument("ensemble header truncated");
    if (h.modes == 0 || h.modes > (1u << 20)) throw InvalidArgument("ensemble header has an implausible mode count");
    return h;
}

std::optional<EnsembleRecord> read_ensemble_record(std::istream& in, const EnsembleHeader& header) {
    EnsembleRecord rec;
    if (!get_u64(in, rec.index)) return std::nullopt;
    rec.state = SpectralState::zero(static_cast<int>(header.modes));
    for (std::uint64_t n = 0; n < header.modes; ++n) {
        const double re = get_f64(in);
        const double im = get_f64(in);
        rec.state.coeffs[static_cast<Eigen::Index>(n)] = {re, im};
    }
    return rec;
}

} // namespace nlslab
