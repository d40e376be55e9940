#include "starris/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include "starris/error.hpp"
#include "starris/specfun.hpp"

namespace starris::quad {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

// QUADPACK qk21 abscissae and weights.
constexpr double xgk[11] = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
constexpr double wgk[11] = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208745958355, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr double wg[5] = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

}  // namespace

double kronrod21(const std::function<double(double)>& f, double a, double b,
                 double& abs_error, double* resabs_out) {
    const double centr = 0.5 * (a + b);
    const double hlgth = 0.5 * (b - a);
    const double dhlgth = std::fabs(hlgth);
    double fv1[10], fv2[10];
    const double fc = f(centr);
    double resg = 0.0;
    double resk = wgk[10] * fc;
    double resabs = std::fabs(resk);
    for (int j = 0; j < 5; ++j) {
        const int jtw = 2 * j + 1;
        const double absc = hlgth * xgk[jtw];
        const double f1 = f(centr - absc);
        const double f2 = f(centr + absc);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        resg += wg[j] * (f1 + f2);
        resk += wgk[jtw] * (f1 + f2);
        resabs += wgk[jtw] * (std::fabs(f1) + std::fabs(f2));
    }
    for (int j = 0; j < 5; ++j) {
        const int jtwm1 = 2 * j;
        const double absc = hlgth * xgk[jtwm1];
        const double f1 = f(centr - absc);
        const double f2 = f(centr + absc);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        resk += wgk[jtwm1] * (f1 + f2);
        resabs += wgk[jtwm1] * (std::fabs(f1) + std::fabs(f2));
    }
    const double reskh = resk * 0.5;
    double resasc = wgk[10] * std::fabs(fc - reskh);
    for (int j = 0; j < 10; ++j)
        resasc += wgk[j] * (std::fabs(fv1[j] - reskh) + std::fabs(fv2[j] - reskh));
    const double result = resk * hlgth;
    resabs *= dhlgth;
    resasc *= dhlgth;
    double err = std::fabs((resk - resg) * hlgth);
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    if (resabs > std::numeric_limits<double>::min() / (50.0 * kEps))
        err = std::max(kEps * 50.0 * resabs, err);
    abs_error = err;
    if (resabs_out) *resabs_out = resabs;
    if (!std::isfinite(result)) throw NumericalError("quadrature: non-finite integrand value");
    return result;
}

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const AdaptiveOptions& opt, const std::vector<double>& breaks) {
    if (!(opt.abs_tol > 0.0) || !(opt.rel_tol > 0.0) || opt.max_subdivisions < 1)
        throw DomainError("quadrature: invalid tolerances");
    if (!std::isfinite(a) || !std::isfinite(b))
        throw DomainError("quadrature: interval must be finite");
    QuadResult out;
    if (a == b) return out;
    if (a > b) {
        out = integrate(f, b, a, opt, breaks);
        out.value = -out.value;
        return out;
    }
    std::vector<double> pts{a};
    for (double x : breaks)
        if (x > a && x < b) pts.push_back(x);
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    std::priority_queue<Panel> heap;
    std::vector<Panel> done;  // panels too narrow to split further
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        double err = 0.0;
        const double v = kronrod21(f, pts[i], pts[i + 1], err);
        heap.push({pts[i], pts[i + 1], v, err});
        out.evaluations += 21;
    }
    auto totals = [&](double& value, double& error) {
        specfun::KahanSum sv, se;
        auto copy = heap;
        while (!copy.empty()) {
            sv.add(copy.top().value);
            se.add(copy.top().error);
            copy.pop();
        }
        for (const auto& p : done) {
            sv.add(p.value);
            se.add(p.error);
        }
        value = sv.value();
        error = se.value();
    };
    double value = 0.0, error = 0.0;
    totals(value, error);
    int count = static_cast<int>(heap.size());
    while (error > std::max(opt.abs_tol, opt.rel_tol * std::fabs(value))) {
        if (heap.empty() || count >= opt.max_subdivisions) {
            std::ostringstream msg;
            msg.precision(6);
            msg << "quadrature: tolerance not met on [" << a << ", " << b << "] after " << count
                << " panels (estimated error " << error << ")";
            throw ToleranceError(msg.str(), error);
        }
        const Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b) ||
            (worst.b - worst.a) < 64.0 * kEps * std::max(std::fabs(worst.a), std::fabs(worst.b))) {
            done.push_back(worst);
        } else {
            double e1 = 0.0, e2 = 0.0;
            const double v1 = kronrod21(f, worst.a, mid, e1);
            const double v2 = kronrod21(f, mid, worst.b, e2);
            out.evaluations += 42;
            heap.push({worst.a, mid, v1, e1});
            heap.push({mid, worst.b, v2, e2});
            ++count;
        }
        totals(value, error);
    }
    out.value = value;
    out.abs_error = error;
    out.intervals = count;
    return out;
}

LogIntegral integrate_log_concave(const std::function<double(double)>& log_f, double lo,
                                  double hi, double guess, double scale,
                                  const LogConcaveOptions& opt) {
    if (!(hi > lo)) throw DomainError("integrate_log_concave: empty interval");
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw DomainError("integrate_log_concave: scale must be positive");
    if (!(opt.tail_level > 0.0 && opt.tail_level < 1.0))
        throw DomainError("integrate_log_concave: tail level must lie in (0, 1)");
    LogIntegral out;
    auto L = [&](double x) {
        ++out.evaluations;
        const double v = log_f(x);
        if (std::isnan(v)) throw NumericalError("integrate_log_concave: NaN log-integrand");
        return v;
    };
    auto clampx = [&](double x) { return std::min(std::max(x, lo), hi); };

    // starting point with a finite log-integrand
    double m = clampx(std::isfinite(guess) ? guess : lo + scale);
    double fm = L(m);
    if (fm == -kInf) {
        bool found = false;
        for (int j = -30; j <= 60 && !found; ++j) {
            for (double sgn : {1.0, -1.0}) {
                const double x = clampx(m + sgn * scale * std::ldexp(1.0, j));
                const double fx = L(x);
                if (fx > -kInf) {
                    m = x;
                    fm = fx;
                    found = true;
                    break;
                }
            }
        }
        if (!found && std::isfinite(hi)) {
            for (int i = 1; i < 64 && !found; ++i) {
                const double x = lo + (hi - lo) * i / 64.0;
                const double fx = L(x);
                if (fx > -kInf) {
                    m = x;
                    fm = fx;
                    found = true;
                }
            }
        }
        if (!found) {
            out.ln_value = -kInf;
            return out;
        }
    }

    // bracket the maximum
    double step = scale;
    double a = m, b = m;
    {
        double xr = clampx(m + step);
        double fr = xr == m ? fm : L(xr);
        if (fr > fm) {
            for (;;) {
                a = m;
                m = xr;
                fm = fr;
                if (m == hi) {
                    b = hi;
                    break;
                }
                step *= 2.0;
                xr = clampx(m + step);
                fr = L(xr);
                if (fr <= fm) {
                    b = xr;
                    break;
                }
            }
        } else {
            b = xr;
            double xl = clampx(m - step);
            double fl = xl == m ? fm : L(xl);
            if (fl > fm) {
                for (;;) {
                    b = m;
                    m = xl;
                    fm = fl;
                    if (m == lo) {
                        a = lo;
                        break;
                    }
                    step *= 2.0;
                    xl = clampx(m - step);
                    fl = L(xl);
                    if (fl <= fm) {
                        a = xl;
                        break;
                    }
                }
            } else {
                a = xl;
            }
        }
    }
    // golden section on [a, b]
    {
        constexpr double r = 0.6180339887498949;
        double x1 = b - r * (b - a), x2 = a + r * (b - a);
        double f1 = L(x1), f2 = L(x2);
        for (int it = 0; it < 60 && (b - a) > 1e-10 * std::max(scale, std::fabs(m)); ++it) {
            if (f1 < f2) {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + r * (b - a);
                f2 = L(x2);
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - r * (b - a);
                f1 = L(x1);
            }
        }
        if (f1 > fm) {
            m = x1;
            fm = f1;
        }
        if (f2 > fm) {
            m = x2;
            fm = f2;
        }
    }
    const double lmax = fm;
    const double peak = m;
    const double cut = lmax + std::log(opt.tail_level) - 7.0;

    auto find_cut = [&](double dir, double bound) {
        const double fb = (std::isfinite(bound)) ? L(bound) : -kInf;
        if (std::isfinite(bound) && fb >= cut) return bound;
        double inside = peak;
        double s = scale;
        double outside = peak;
        for (;;) {
            double x = peak + dir * s;
            if (std::isfinite(bound) && dir * (x - bound) >= 0.0) {
                outside = bound;
                break;
            }
            if (L(x) < cut) {
                outside = x;
                break;
            }
            inside = x;
            s *= 2.0;
            if (s > 1e300) throw NumericalError("integrate_log_concave: integrand does not decay");
        }
        for (int it = 0; it < 40; ++it) {
            const double mid = 0.5 * (inside + outside);
            if (mid == inside || mid == outside) break;
            if (L(mid) >= cut)
                inside = mid;
            else
                outside = mid;
            if (std::fabs(outside - inside) < 1e-3 * scale) break;
        }
        return outside;
    };
    const double left = find_cut(-1.0, lo);
    const double right = find_cut(1.0, hi);
    out.peak_at = peak;
    out.lo_cut = left;
    out.hi_cut = right;
    if (!(right > left)) {
        out.ln_value = -kInf;
        return out;
    }

    std::vector<double> breaks;
    const int panels = std::max(1, opt.initial_panels);
    for (int i = 1; i < panels; ++i) breaks.push_back(left + (right - left) * i / panels);
    breaks.push_back(peak);
    auto g = [&](double x) {
        const double v = L(x);
        return v == -kInf ? 0.0 : std::exp(v - lmax);
    };
    const QuadResult r = integrate(g, left, right, opt.adaptive, breaks);
    if (!(r.value > 0.0)) {
        out.ln_value = -kInf;
        return out;
    }
    out.ln_value = lmax + std::log(r.value);
    out.rel_error = r.abs_error / r.value + opt.tail_level;
    return out;
}

}  // namespace starris::quad
