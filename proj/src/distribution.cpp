#include "klrlab/distribution.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "klrlab/error.hpp"
#include "klrlab/parallel.hpp"

namespace klrlab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool condition, const std::string& message) {
    if (!condition) throw InvalidArgument(message);
}

std::string num(double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

}  // namespace

DistributionSpec DistributionSpec::gaussian(double mean, double variance) {
    require(std::isfinite(mean), "gaussian mean must be finite");
    require(std::isfinite(variance) && variance > 0.0, "gaussian variance must be > 0");
    return DistributionSpec(dist::Gaussian{mean, variance});
}

DistributionSpec DistributionSpec::laplace(double mean, double scale) {
    require(std::isfinite(mean), "laplace mean must be finite");
    require(std::isfinite(scale) && scale > 0.0, "laplace scale must be > 0");
    return DistributionSpec(dist::Laplace{mean, scale});
}

DistributionSpec DistributionSpec::uniform(double lo, double hi) {
    require(std::isfinite(lo) && std::isfinite(hi) && lo < hi, "uniform requires finite lo < hi");
    return DistributionSpec(dist::Uniform{lo, hi});
}

DistributionSpec DistributionSpec::exponential(double rate, bool centered) {
    require(std::isfinite(rate) && rate > 0.0, "exponential rate must be > 0");
    return DistributionSpec(dist::Exponential{rate, centered, 0.0});
}

DistributionSpec DistributionSpec::mixture(std::vector<double> weights,
                                           std::vector<DistributionSpec> components) {
    require(!components.empty(), "mixture needs at least one component");
    require(weights.size() == components.size(), "mixture weights and components differ in length");
    double total = 0.0;
    for (double w : weights) {
        require(std::isfinite(w) && w >= 0.0, "mixture weights must be nonnegative");
        total += w;
    }
    require(std::abs(total - 1.0) <= 1e-12, "mixture weights must sum to 1");
    return DistributionSpec(dist::Mixture{std::move(weights), std::move(components)});
}

std::string DistributionSpec::kind() const {
    return std::visit(Overloaded{
                          [](const dist::Gaussian&) { return std::string("gaussian"); },
                          [](const dist::Laplace&) { return std::string("laplace"); },
                          [](const dist::Uniform&) { return std::string("uniform"); },
                          [](const dist::Exponential&) { return std::string("exponential"); },
                          [](const dist::Mixture&) { return std::string("mixture"); },
                          [](const dist::GaussConvolved&) { return std::string("gauss_convolved"); },
                      },
                      value_);
}

std::string DistributionSpec::describe() const {
    return std::visit(
        Overloaded{
            [](const dist::Gaussian& g) {
                return "gaussian(mean=" + num(g.mean) + ", variance=" + num(g.variance) + ")";
            },
            [](const dist::Laplace& l) {
                return "laplace(mean=" + num(l.mean) + ", scale=" + num(l.scale) + ")";
            },
            [](const dist::Uniform& u) { return "uniform(lo=" + num(u.lo) + ", hi=" + num(u.hi) + ")"; },
            [](const dist::Exponential& e) {
                std::string s = "exponential(rate=" + num(e.rate) +
                                ", centered=" + (e.centered ? "true" : "false");
                if (e.shift != 0.0) s += ", shift=" + num(e.shift);
                return s + ")";
            },
            [](const dist::Mixture& m) {
                std::string s = "mixture(";
                for (std::size_t i = 0; i < m.components.size(); ++i) {
                    if (i) s += "; ";
                    s += num(m.weights[i]) + "*" + m.components[i].describe();
                }
                return s + ")";
            },
            [](const dist::GaussConvolved& g) {
                return g.base->describe() + " + gaussian(variance=" + num(g.added_variance) + ")";
            },
        },
        value_);
}

double sample_one(const DistributionSpec& spec, DrawStream& stream) {
    return std::visit(
        Overloaded{
            [&](const dist::Gaussian& g) { return g.mean + std::sqrt(g.variance) * stream.normal(); },
            [&](const dist::Laplace& l) {
                const double u = stream.uniform() - 0.5;
                const double magnitude = -l.scale * std::log1p(-2.0 * std::abs(u));
                return l.mean + (u < 0.0 ? -magnitude : magnitude);
            },
            [&](const dist::Uniform& u) { return u.lo + (u.hi - u.lo) * stream.uniform(); },
            [&](const dist::Exponential& e) {
                const double x = -std::log(stream.uniform()) / e.rate;
                return x - (e.centered ? 1.0 / e.rate : 0.0) + e.shift;
            },
            [&](const dist::Mixture& m) {
                const double u = stream.uniform();
                double cumulative = 0.0;
                std::size_t pick = m.components.size() - 1;
                for (std::size_t i = 0; i < m.weights.size(); ++i) {
                    cumulative += m.weights[i];
                    if (u < cumulative) {
                        pick = i;
                        break;
                    }
                }
                return sample_one(m.components[pick], stream);
            },
            [&](const dist::GaussConvolved& g) {
                const double base = sample_one(*g.base, stream);
                return base + std::sqrt(g.added_variance) * stream.normal();
            },
        },
        spec.variant());
}

std::vector<double> sample(const DistributionSpec& spec, std::size_t count, const Seed& seed) {
    if (count == 0) throw InvalidArgument("sample count must be >= 1");
    const Philox4x32 engine(seed);
    std::vector<double> out(count);
    parallel_for(0, count, [&](std::size_t i) {
        DrawStream stream(engine, i);
        out[i] = sample_one(spec, stream);
    });
    return out;
}

std::complex<double> cf_exact(const DistributionSpec& spec, double t) {
    if (t == 0.0) return {1.0, 0.0};
    return std::visit(
        Overloaded{
            [&](const dist::Gaussian& g) {
                return std::polar(std::exp(-0.5 * g.variance * t * t), g.mean * t);
            },
            [&](const dist::Laplace& l) {
                const double s = l.scale * t;
                return std::polar(1.0 / (1.0 + s * s), l.mean * t);
            },
            [&](const dist::Uniform& u) {
                const double mid = 0.5 * (u.lo + u.hi);
                const double half = 0.5 * (u.hi - u.lo) * t;
                return std::polar(1.0, mid * t) * (std::sin(half) / half);
            },
            [&](const dist::Exponential& e) {
                const double location = e.shift - (e.centered ? 1.0 / e.rate : 0.0);
                const std::complex<double> core = e.rate / std::complex<double>(e.rate, -t);
                return core * std::polar(1.0, location * t);
            },
            [&](const dist::Mixture& m) {
                std::complex<double> acc{0.0, 0.0};
                for (std::size_t i = 0; i < m.components.size(); ++i) {
                    acc += m.weights[i] * cf_exact(m.components[i], t);
                }
                return acc;
            },
            [&](const dist::GaussConvolved& g) {
                return cf_exact(*g.base, t) * std::exp(-0.5 * g.added_variance * t * t);
            },
        },
        spec.variant());
}

double mean(const DistributionSpec& spec) {
    return std::visit(Overloaded{
                          [](const dist::Gaussian& g) { return g.mean; },
                          [](const dist::Laplace& l) { return l.mean; },
                          [](const dist::Uniform& u) { return 0.5 * (u.lo + u.hi); },
                          [](const dist::Exponential& e) {
                              return (e.centered ? 0.0 : 1.0 / e.rate) + e.shift;
                          },
                          [](const dist::Mixture& m) {
                              double acc = 0.0;
                              for (std::size_t i = 0; i < m.components.size(); ++i) {
                                  acc += m.weights[i] * mean(m.components[i]);
                              }
                              return acc;
                          },
                          [](const dist::GaussConvolved& g) { return mean(*g.base); },
                      },
                      spec.variant());
}

double moment2(const DistributionSpec& spec) {
    if (const auto* m = std::get_if<dist::Mixture>(&spec.variant())) {
        double acc = 0.0;
        for (std::size_t i = 0; i < m->components.size(); ++i) acc += m->weights[i] * moment2(m->components[i]);
        return acc;
    }
    const double mu = mean(spec);
    return variance(spec) + mu * mu;
}

double variance(const DistributionSpec& spec) {
    return std::visit(Overloaded{
                          [](const dist::Gaussian& g) { return g.variance; },
                          [](const dist::Laplace& l) { return 2.0 * l.scale * l.scale; },
                          [](const dist::Uniform& u) {
                              const double w = u.hi - u.lo;
                              return w * w / 12.0;
                          },
                          [](const dist::Exponential& e) { return 1.0 / (e.rate * e.rate); },
                          [&](const dist::Mixture&) {
                              const double mu = mean(spec);
                              return moment2(spec) - mu * mu;
                          },
                          [](const dist::GaussConvolved& g) { return variance(*g.base) + g.added_variance; },
                      },
                      spec.variant());
}

DistributionSpec shifted(const DistributionSpec& spec, double delta) {
    using V = DistributionSpec::Variant;
    return DistributionSpec(std::visit(
        Overloaded{
            [&](dist::Gaussian g) -> V {
                g.mean += delta;
                return g;
            },
            [&](dist::Laplace l) -> V {
                l.mean += delta;
                return l;
            },
            [&](dist::Uniform u) -> V {
                u.lo += delta;
                u.hi += delta;
                return u;
            },
            [&](dist::Exponential e) -> V {
                e.shift += delta;
                return e;
            },
            [&](const dist::Mixture& m) -> V {
                dist::Mixture out{m.weights, {}};
                out.components.reserve(m.components.size());
                for (const auto& c : m.components) out.components.push_back(shifted(c, delta));
                return out;
            },
            [&](const dist::GaussConvolved& g) -> V {
                return dist::GaussConvolved{std::make_shared<const DistributionSpec>(shifted(*g.base, delta)),
                                            g.added_variance};
            },
        },
        spec.variant()));
}

DistributionSpec centered(const DistributionSpec& spec) {
    if (const auto* e = std::get_if<dist::Exponential>(&spec.variant())) {
        return DistributionSpec(dist::Exponential{e->rate, true, 0.0});
    }
    if (const auto* g = std::get_if<dist::GaussConvolved>(&spec.variant())) {
        return DistributionSpec(
            dist::GaussConvolved{std::make_shared<const DistributionSpec>(centered(*g->base)), g->added_variance});
    }
    const double mu = mean(spec);
    if (mu == 0.0) return spec;
    return shifted(spec, -mu);
}

DistributionSpec convolve_gaussian(const DistributionSpec& spec, double added_variance) {
    if (!(std::isfinite(added_variance) && added_variance > 0.0)) {
        throw InvalidArgument("added Gaussian variance must be > 0");
    }
    if (const auto* g = std::get_if<dist::GaussConvolved>(&spec.variant())) {
        return DistributionSpec(dist::GaussConvolved{g->base, g->added_variance + added_variance});
    }
    return DistributionSpec(
        dist::GaussConvolved{std::make_shared<const DistributionSpec>(spec), added_variance});
}

}  // namespace klrlab
