#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dynfer/errors.hpp"
#include "dynfer/rng.hpp"

namespace dynfer {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;
using Cube = std::vector<Mat>;

// Row sums must hit 1 within this tolerance to validate.
inline constexpr double kProbTol = 1e-9;
// Internal renormalizations trigger only past this drift.
inline constexpr double kRenormTol = 1e-12;

struct FiniteSpace {
    int size = 0;
};

// Probability vector over one finite space.
struct Distribution {
    Vec p;
};

// Controlled transition table, indexed [x][yhat][x_next].
// Round i's estimate steers the draw of the round i+1 observation.
struct ObservationKernel {
    Cube t;
};

// Conditional law of the hidden quantity given the observation, [x][y].
struct QuantityKernel {
    Mat t;
};

// Per-round loss, indexed [x][y][yhat]. Entries are any finite reals.
struct LossTensor {
    Cube t;
};

// Finite candidate set of quantity kernels, indexed by the parameter w.
struct ParametricFamily {
    std::vector<QuantityKernel> members;

    int param_count() const { return static_cast<int>(members.size()); }
};

// Probability vector over the parameter set.
struct Belief {
    Vec p;
};

// Observed (x, y) pairs in draw order. In the imitation data model the
// true quantity value sits in the estimate slot of the transition kernel.
struct Dataset {
    std::vector<std::pair<int, int>> pairs;

    int size() const { return static_cast<int>(pairs.size()); }
};

/**
 * One finite estimation problem instance.
 *
 * Exactly one of `quantity` (known-model mode) and `family` + `prior`
 * (learning modes) is set. Per-round kernel lists hold horizon - 1 entries;
 * a shared kernel is stored once with `shared_kernel` set. A horizon of 1
 * needs no kernel at all.
 */
struct Scenario {
    FiniteSpace x_space;
    FiniteSpace y_space;
    FiniteSpace yhat_space;
    int horizon = 0;
    Distribution init;
    std::vector<ObservationKernel> obs_kernels;
    bool shared_kernel = false;
    std::optional<QuantityKernel> quantity;
    std::optional<ParametricFamily> family;
    std::optional<Belief> prior;
    LossTensor loss;

    int nx() const { return x_space.size; }
    int ny() const { return y_space.size; }
    int nyhat() const { return yhat_space.size; }
    int n() const { return horizon; }
    bool learning() const { return family.has_value(); }
    int nw() const { return family ? family->param_count() : 0; }

    // Kernel driving the round i -> i+1 transition, 0 <= i <= horizon - 2.
    const ObservationKernel& obs_kernel_for_transition(int i) const {
        if (obs_kernels.empty()) throw std::logic_error("scenario has no observation kernel");
        if (shared_kernel) return obs_kernels[0];
        return obs_kernels[static_cast<std::size_t>(i)];
    }

    // Kernel for dataset step j (0-based transition index, unbounded):
    // steps past the last stored kernel reuse the final one.
    const ObservationKernel& obs_kernel_for_step(int j) const {
        if (obs_kernels.empty()) throw std::logic_error("scenario has no observation kernel");
        if (shared_kernel) return obs_kernels[0];
        std::size_t idx = std::min<std::size_t>(static_cast<std::size_t>(j), obs_kernels.size() - 1);
        return obs_kernels[idx];
    }
};

// ---------------------------------------------------------------------------
// Validation

struct Violation {
    std::string slice;   // offending tensor slice, e.g. "obs_kernel[0] row (x=1, yhat=0)"
    double defect = 0.0; // numeric size of the defect
    std::string detail;  // human-readable description

    std::string text() const { return slice + ": " + detail; }
};

struct ValidationResult {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
};

namespace detail {

inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

inline void check_prob_row(const Vec& row, int expected_len, const std::string& slice,
                           std::vector<Violation>& out) {
    if (static_cast<int>(row.size()) != expected_len) {
        out.push_back({slice, 0.0,
                       "length " + std::to_string(row.size()) + ", expected " +
                           std::to_string(expected_len)});
        return;
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k) {
        double v = row[k];
        if (!std::isfinite(v)) {
            out.push_back({slice, 0.0, "entry " + std::to_string(k) + " is not finite"});
            return;
        }
        if (v < 0.0) {
            out.push_back({slice, -v,
                           "entry " + std::to_string(k) + " is negative (" + fmt_double(v) + ")"});
            return;
        }
        sum += v;
    }
    double defect = std::fabs(sum - 1.0);
    if (defect > kProbTol) {
        out.push_back({slice, defect,
                       "sum = " + fmt_double(sum) + ", defect " + fmt_double(defect)});
    }
}

inline void check_quantity_kernel(const QuantityKernel& k, int nx, int ny,
                                  const std::string& name, std::vector<Violation>& out) {
    if (static_cast<int>(k.t.size()) != nx) {
        out.push_back({name, 0.0,
                       "has " + std::to_string(k.t.size()) + " rows, expected " +
                           std::to_string(nx)});
        return;
    }
    for (int x = 0; x < nx; ++x) {
        check_prob_row(k.t[x], ny, name + " row (x=" + std::to_string(x) + ")", out);
    }
}

}  // namespace detail

/**
 * Structural and stochastic checks for a scenario. Returns every violation
 * found, each naming the offending slice and its numeric defect; an empty
 * list means the scenario is well formed.
 */
inline ValidationResult validate_scenario(const Scenario& s) {
    ValidationResult res;
    auto& out = res.violations;

    if (s.nx() <= 0) out.push_back({"x_space", 0.0, "size must be positive"});
    if (s.ny() <= 0) out.push_back({"y_space", 0.0, "size must be positive"});
    if (s.nyhat() <= 0) out.push_back({"yhat_space", 0.0, "size must be positive"});
    if (s.horizon < 1)
        out.push_back({"horizon", 0.0, "must be at least 1, got " + std::to_string(s.horizon)});
    if (!res.ok()) return res;

    const int nx = s.nx(), ny = s.ny(), nyhat = s.nyhat();

    detail::check_prob_row(s.init.p, nx, "init distribution", out);

    // Kernel count: per-round lists carry horizon - 1 kernels, a shared
    // kernel is stored once. Horizon 1 also admits an empty list.
    const auto nk = static_cast<int>(s.obs_kernels.size());
    bool count_ok = s.shared_kernel ? (nk == 1)
                                    : (nk == s.horizon - 1 || (s.horizon == 1 && nk == 0));
    if (!count_ok) {
        out.push_back({"obs_kernels", 0.0,
                       "holds " + std::to_string(nk) + " kernels, expected " +
                           (s.shared_kernel ? std::string("1 (shared)")
                                            : std::to_string(s.horizon - 1))});
    } else {
        for (int k = 0; k < nk; ++k) {
            const auto& kt = s.obs_kernels[static_cast<std::size_t>(k)].t;
            std::string name = "obs_kernel[" + std::to_string(k) + "]";
            if (static_cast<int>(kt.size()) != nx) {
                out.push_back({name, 0.0,
                               "has " + std::to_string(kt.size()) + " x-slices, expected " +
                                   std::to_string(nx)});
                continue;
            }
            for (int x = 0; x < nx; ++x) {
                if (static_cast<int>(kt[x].size()) != nyhat) {
                    out.push_back({name + " slice (x=" + std::to_string(x) + ")", 0.0,
                                   "has " + std::to_string(kt[x].size()) +
                                       " yhat-rows, expected " + std::to_string(nyhat)});
                    continue;
                }
                for (int yh = 0; yh < nyhat; ++yh) {
                    detail::check_prob_row(
                        kt[x][yh], nx,
                        name + " row (x=" + std::to_string(x) + ", yhat=" + std::to_string(yh) + ")",
                        out);
                }
            }
        }
    }

    // Mode: exactly one of a known kernel and a family with prior.
    const bool has_known = s.quantity.has_value();
    const bool has_family = s.family.has_value() || s.prior.has_value();
    if (has_known && has_family) {
        out.push_back({"mode", 0.0, "both a known quantity kernel and a parametric family are set"});
    } else if (!has_known && !s.family.has_value()) {
        out.push_back({"mode", 0.0, "neither a known quantity kernel nor a parametric family is set"});
    }
    if (has_known) {
        detail::check_quantity_kernel(*s.quantity, nx, ny, "quantity kernel", out);
    }
    if (s.family.has_value()) {
        if (s.family->members.empty()) {
            out.push_back({"family", 0.0, "must hold at least one member"});
        } else {
            for (int w = 0; w < s.family->param_count(); ++w) {
                detail::check_quantity_kernel(s.family->members[static_cast<std::size_t>(w)],
                                              nx, ny, "family member [w=" + std::to_string(w) + "]",
                                              out);
            }
        }
        if (!s.prior.has_value()) {
            out.push_back({"prior", 0.0, "learning mode requires a prior over the family"});
        } else {
            detail::check_prob_row(s.prior->p, s.family->param_count(), "prior", out);
        }
    } else if (s.prior.has_value()) {
        out.push_back({"prior", 0.0, "a prior is set but no parametric family"});
    }

    // Loss entries are unconstrained reals but must be finite.
    if (static_cast<int>(s.loss.t.size()) != nx) {
        out.push_back({"loss", 0.0,
                       "has " + std::to_string(s.loss.t.size()) + " x-slices, expected " +
                           std::to_string(nx)});
    } else {
        for (int x = 0; x < nx; ++x) {
            if (static_cast<int>(s.loss.t[x].size()) != ny) {
                out.push_back({"loss slice (x=" + std::to_string(x) + ")", 0.0,
                               "has " + std::to_string(s.loss.t[x].size()) + " y-rows, expected " +
                                   std::to_string(ny)});
                continue;
            }
            for (int y = 0; y < ny; ++y) {
                const auto& row = s.loss.t[x][y];
                if (static_cast<int>(row.size()) != nyhat) {
                    out.push_back(
                        {"loss row (x=" + std::to_string(x) + ", y=" + std::to_string(y) + ")", 0.0,
                         "has " + std::to_string(row.size()) + " entries, expected " +
                             std::to_string(nyhat)});
                    continue;
                }
                for (int yh = 0; yh < nyhat; ++yh) {
                    if (!std::isfinite(row[yh])) {
                        out.push_back({"loss entry (x=" + std::to_string(x) + ", y=" +
                                           std::to_string(y) + ", yhat=" + std::to_string(yh) + ")",
                                       0.0, "is not finite"});
                    }
                }
            }
        }
    }

    return res;
}

// Throws ValidationError unless `s` validates cleanly.
inline void require_valid(const Scenario& s, const char* who) {
    ValidationResult r = validate_scenario(s);
    if (!r.ok()) {
        std::string msg = std::string(who) + ": scenario invalid: " + r.violations.front().text();
        if (r.violations.size() > 1) {
            msg += " (+" + std::to_string(r.violations.size() - 1) + " more)";
        }
        throw ValidationError(msg);
    }
}

// ---------------------------------------------------------------------------
// Mixture kernel

/**
 * Belief-weighted average of the family members:
 *   out[x][y] = sum_w belief[w] * member_w[x][y].
 * Rows are renormalized only if accumulated drift exceeds kRenormTol, so a
 * point-mass belief reproduces its member bit for bit.
 */
inline QuantityKernel mixture_kernel(const ParametricFamily& family, const Belief& belief) {
    if (family.members.empty()) throw std::invalid_argument("mixture_kernel: empty family");
    if (belief.p.size() != family.members.size())
        throw std::invalid_argument("mixture_kernel: belief length does not match family size");

    const auto nx = family.members[0].t.size();
    QuantityKernel out;
    out.t.assign(nx, Vec(family.members[0].t.empty() ? 0 : family.members[0].t[0].size(), 0.0));
    for (std::size_t x = 0; x < nx; ++x) {
        auto& row = out.t[x];
        for (std::size_t w = 0; w < family.members.size(); ++w) {
            const double bw = belief.p[w];
            const auto& src = family.members[w].t[x];
            if (src.size() != row.size())
                throw std::invalid_argument("mixture_kernel: member rows disagree in length");
            for (std::size_t y = 0; y < row.size(); ++y) row[y] += bw * src[y];
        }
        double sum = 0.0;
        for (double v : row) sum += v;
        if (std::fabs(sum - 1.0) > kRenormTol && sum > 0.0) {
            for (double& v : row) v /= sum;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dataset generation

/**
 * Draws an imitation-style dataset of m (x, y) pairs under family member w:
 * x_1 from the initial distribution, y_j from member w at x_j, and x_{j+1}
 * from the step kernel with the true y_j in the estimate slot. Steps past
 * the stored kernels reuse the final kernel. One categorical draw per
 * variable, in trajectory order, so a fixed seed fixes the dataset.
 */
inline Dataset generate_dataset(const Scenario& s, int w, int m, std::uint64_t seed) {
    require_valid(s, "generate_dataset");
    if (!s.learning()) throw std::invalid_argument("generate_dataset: scenario is not in learning mode");
    if (w < 0 || w >= s.nw()) throw std::invalid_argument("generate_dataset: parameter index out of range");
    if (m < 0) throw std::invalid_argument("generate_dataset: negative dataset length");

    Dataset d;
    if (m == 0) return d;
    if (m >= 2) {
        if (s.obs_kernels.empty())
            throw std::invalid_argument(
                "generate_dataset: scenario has no observation kernel to chain pairs with");
        if (s.ny() > s.nyhat())
            throw std::invalid_argument(
                "generate_dataset: quantity alphabet exceeds the estimate alphabet, the true value "
                "cannot occupy the estimate slot");
    }

    const QuantityKernel& member = s.family->members[static_cast<std::size_t>(w)];
    SampleStream stream(seed);
    d.pairs.reserve(static_cast<std::size_t>(m));

    int x = stream.sample(s.init.p);
    for (int j = 0; j < m; ++j) {
        int y = stream.sample(member.t[static_cast<std::size_t>(x)]);
        d.pairs.emplace_back(x, y);
        if (j + 1 < m) {
            const ObservationKernel& k = s.obs_kernel_for_step(j);
            x = stream.sample(k.t[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)]);
        }
    }
    return d;
}

}  // namespace dynfer
