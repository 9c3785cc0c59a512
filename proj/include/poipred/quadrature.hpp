#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace poipred {

struct LogQuad {
    double log_value;    // log of the (nonnegative) integral
    double est_rel_err;  // accumulated Kronrod-Gauss discrepancy, relative
    int n_panels;
};

namespace quad_detail {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// 15-point Kronrod extension of the 7-point Gauss rule on [-1,1].
// Abscissae kx[0..7] (nonnegative half), Kronrod weights kw, Gauss weights gw
// attached to kx[0], kx[2], kx[4], kx[6].
constexpr double kx[8] = {
    0.000000000000000000000000000000000,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329};
constexpr double kw[8] = {
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970};
constexpr double gw[4] = {
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082};

struct Panel {
    double a, b;
    double log_val;  // log of the K15 estimate
    double log_err;  // log of |K15 - G7|, floored at roundoff level
};

template <class F>
Panel eval_panel(F&& log_f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    double lf[15];
    lf[0] = log_f(mid);
    for (int j = 1; j < 8; ++j) {
        lf[2 * j - 1] = log_f(mid + half * kx[j]);
        lf[2 * j] = log_f(mid - half * kx[j]);
    }

    double m = kNegInf;
    for (double v : lf) m = std::max(m, v);
    Panel p{a, b, kNegInf, kNegInf};
    if (m == kNegInf) return p;

    double s15 = kw[0] * std::exp(lf[0] - m);
    for (int j = 1; j < 8; ++j)
        s15 += kw[j] * (std::exp(lf[2 * j - 1] - m) + std::exp(lf[2 * j] - m));
    double s7 = gw[0] * std::exp(lf[0] - m);
    for (int j = 1; j < 4; ++j)
        s7 += gw[j] * (std::exp(lf[4 * j - 1] - m) + std::exp(lf[4 * j] - m));

    const double diff = std::max(std::fabs(s15 - s7), s15 * 1e-16);
    p.log_val = m + std::log(half * s15);
    p.log_err = m + std::log(half * diff);
    return p;
}

inline void totals(const std::vector<Panel>& panels, double& log_total, double& log_err) {
    double m = kNegInf, me = kNegInf;
    for (const Panel& p : panels) {
        m = std::max(m, p.log_val);
        me = std::max(me, p.log_err);
    }
    if (m == kNegInf) {
        log_total = kNegInf;
        log_err = kNegInf;
        return;
    }
    double s = 0.0, se = 0.0;
    for (const Panel& p : panels) {
        if (p.log_val != kNegInf) s += std::exp(p.log_val - m);
        if (p.log_err != kNegInf && me != kNegInf) se += std::exp(p.log_err - me);
    }
    log_total = m + std::log(s);
    log_err = (me == kNegInf) ? kNegInf : me + std::log(se);
}

}  // namespace quad_detail

// Integrates exp(log_f(w)) over [a,b] with adaptive Gauss-Kronrod 15(7)
// panels. Each panel subtracts its own running maximum of log_f before
// exponentiating, so the integrand may span the full double exponent range;
// log_f may return -inf where the integrand vanishes.
template <class F>
LogQuad integrate_log_t(F&& log_f, double a, double b, double rel_tol, int max_panels) {
    using quad_detail::kNegInf;
    using quad_detail::Panel;
    if (!(b > a)) throw std::invalid_argument("integrate_log: empty interval");
    std::vector<Panel> panels;
    panels.reserve(64);
    panels.push_back(quad_detail::eval_panel(log_f, a, b));

    const double min_width = (b - a) * 1e-13;
    const double log_tol = std::log(rel_tol);
    double log_total = kNegInf, log_err = kNegInf;
    for (;;) {
        quad_detail::totals(panels, log_total, log_err);
        if (log_total == kNegInf) break;
        if (log_err == kNegInf || log_err - log_total <= log_tol) break;
        if (static_cast<int>(panels.size()) >= max_panels) break;

        std::size_t worst = 0;
        double worst_err = kNegInf;
        for (std::size_t i = 0; i < panels.size(); ++i) {
            if (panels[i].log_err > worst_err && panels[i].b - panels[i].a > min_width) {
                worst_err = panels[i].log_err;
                worst = i;
            }
        }
        if (worst_err == kNegInf) break;  // nothing refinable left

        const Panel p = panels[worst];
        const double mid = 0.5 * (p.a + p.b);
        panels[worst] = quad_detail::eval_panel(log_f, p.a, mid);
        panels.push_back(quad_detail::eval_panel(log_f, mid, p.b));
    }

    LogQuad out;
    out.log_value = log_total;
    out.est_rel_err = (log_total == kNegInf || log_err == kNegInf)
                          ? 0.0
                          : std::exp(std::min(log_err - log_total, 0.0));
    out.n_panels = static_cast<int>(panels.size());
    return out;
}

LogQuad integrate_log(const std::function<double(double)>& log_f, double a, double b,
                      double rel_tol, int max_panels);

// Gauss-Legendre rule on [0,1].
void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace poipred
