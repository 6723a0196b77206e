#include "equnfold/delay_system.hpp"

#include "equnfold/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>

namespace equnfold {

DelayOperator::DelayOperator(int n, std::vector<DelayTerm> terms) : n_(n), terms_(std::move(terms)) {
    if (n_ <= 0) {
        throw Error(ErrorKind::Structural, "state dimension must be positive");
    }
    if (terms_.empty()) {
        throw Error(ErrorKind::Structural, "delay operator needs at least one term");
    }
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        const auto& t = terms_[i];
        if (!(t.delay >= 0.0) || !std::isfinite(t.delay)) {
            throw Error(ErrorKind::Structural, "delays must be finite and nonnegative");
        }
        if (t.coefficient.rows() != n_ || t.coefficient.cols() != n_) {
            throw Error(ErrorKind::Structural, "delay coefficient has wrong shape");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (terms_[j].delay == t.delay) {
                throw Error(ErrorKind::Structural, "delays must be distinct");
            }
        }
        horizon_ = std::max(horizon_, t.delay);
    }
}

DelayOperator DelayOperator::merged(int n, const std::vector<DelayTerm>& terms) {
    std::map<double, CMatrix> by_lag;
    for (const auto& t : terms) {
        auto [it, inserted] = by_lag.try_emplace(t.delay, t.coefficient);
        if (!inserted) {
            it->second += t.coefficient;
        }
    }
    std::vector<DelayTerm> out;
    for (auto& [lag, a] : by_lag) {
        out.push_back({lag, std::move(a)});
    }
    return DelayOperator(n, std::move(out));
}

bool DelayOperator::is_real(double tol) const {
    return std::all_of(terms_.begin(), terms_.end(),
                       [tol](const DelayTerm& t) { return t.coefficient.imag().cwiseAbs().maxCoeff() <= tol; });
}

CMatrix char_matrix(const DelayOperator& op, cplx lambda) {
    CMatrix d = lambda * CMatrix::Identity(op.dim(), op.dim());
    for (const auto& t : op.terms()) {
        d -= t.coefficient * std::exp(-lambda * t.delay);
    }
    return d;
}

CMatrix char_matrix_derivative(const DelayOperator& op, cplx lambda) {
    CMatrix d = CMatrix::Identity(op.dim(), op.dim());
    for (const auto& t : op.terms()) {
        d += t.delay * t.coefficient * std::exp(-lambda * t.delay);
    }
    return d;
}

double check_equivariance(const DelayOperator& op, const Representation& rep) {
    if (rep.dim != op.dim()) {
        throw Error(ErrorKind::Structural, "representation dimension does not match the operator");
    }
    double worst = 0.0;
    for (const auto& t : op.terms()) {
        worst = std::max(worst, commutation_residual(rep, t.coefficient));
    }
    return worst;
}

namespace {

// int_0^{-r} exp(a xi) dxi = (exp(-a r) - 1) / a, with the a -> 0 limit -r.
cplx integral_exp(cplx a, double r) {
    const cplx z = -a * r;
    if (std::abs(z) < 1e-4) {
        // (e^z - 1)/z = 1 + z/2 + z^2/6 + z^3/24 + ...
        return -r * (1.0 + z * (0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0 + z / 120.0))));
    }
    return (std::exp(z) - 1.0) / a;
}

void check_shapes(const AdjointFunction& psi, const EigenFunction& phi, const DelayOperator& op) {
    if (psi.direction.size() != op.dim() || phi.direction.size() != op.dim()) {
        throw Error(ErrorKind::Structural, "bilinear form: vector length does not match operator");
    }
}

struct GaussRule {
    std::array<double, 8> nodes{};
    std::array<double, 8> weights{};
};

// 8-point Gauss-Legendre on [-1, 1] by Newton iteration on P_8.
const GaussRule& gauss8() {
    static const GaussRule rule = [] {
        GaussRule g;
        constexpr int n = 8;
        for (int i = 0; i < n; ++i) {
            double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0;
                double p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) {
                    break;
                }
            }
            g.nodes[i] = x;
            g.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        return g;
    }();
    return rule;
}

}  // namespace

cplx bilinear_form(const AdjointFunction& psi, const EigenFunction& phi, const DelayOperator& op) {
    check_shapes(psi, phi, op);
    cplx value = (psi.direction * phi.direction)(0, 0);
    const cplx a = phi.exponent - psi.exponent;
    for (const auto& t : op.terms()) {
        if (t.delay == 0.0) {
            continue;
        }
        const cplx wau = (psi.direction * t.coefficient * phi.direction)(0, 0);
        value -= wau * std::exp(-psi.exponent * t.delay) * integral_exp(a, t.delay);
    }
    return value;
}

cplx bilinear_form_quadrature(const AdjointFunction& psi, const EigenFunction& phi, const DelayOperator& op,
                              int npoints) {
    check_shapes(psi, phi, op);
    const auto& rule = gauss8();
    const int panels = std::max(1, (npoints + 7) / 8);
    cplx value = (psi(0.0) * phi(0.0))(0, 0);
    for (const auto& t : op.terms()) {
        const double r = t.delay;
        if (r == 0.0) {
            continue;
        }
        // int_0^{-r} f = -int_{-r}^0 f
        cplx integral = 0.0;
        const double h = r / panels;
        for (int p = 0; p < panels; ++p) {
            const double lo = -r + p * h;
            for (int i = 0; i < 8; ++i) {
                const double xi = lo + 0.5 * h * (rule.nodes[i] + 1.0);
                integral += 0.5 * h * rule.weights[i] * (psi(xi + r) * t.coefficient * phi(xi))(0, 0);
            }
        }
        value += integral;
    }
    return value;
}

CMatrix bilinear_gram(const std::vector<AdjointFunction>& psi, const std::vector<EigenFunction>& phi,
                      const DelayOperator& op) {
    CMatrix g(static_cast<Eigen::Index>(psi.size()), static_cast<Eigen::Index>(phi.size()));
    for (std::size_t i = 0; i < psi.size(); ++i) {
        for (std::size_t j = 0; j < phi.size(); ++j) {
            g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = bilinear_form(psi[i], phi[j], op);
        }
    }
    return g;
}

}  // namespace equnfold
