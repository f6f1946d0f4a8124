#include "voxevo/activation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace voxevo {

namespace {

constexpr std::array<std::string_view, kActivationCount> kNames{
    "sine",    "neg_sine", "abs",   "neg_abs", "square",   "neg_square", "sqrt_abs", "neg_sqrt_abs",
    "sigmoid", "clamped",  "cube",  "exp",     "gauss",    "hat",        "identity", "inverse",
    "log",     "relu",     "selu",  "lelu",    "elu",      "softplus",   "tanh",
};

constexpr double kSeluAlpha = 1.6732632423543772;
constexpr double kSeluScale = 1.0507009873554805;
constexpr double kInverseEps = 1e-7;
constexpr double kLogFloor = 1e-7;

double clamp(double v, double lim) { return std::clamp(v, -lim, lim); }

}  // namespace

std::string_view activation_name(Activation a) noexcept { return kNames[static_cast<std::size_t>(a)]; }

std::optional<Activation> activation_from_name(std::string_view name) noexcept
{
    for (std::size_t i = 0; i < kNames.size(); ++i) {
        if (kNames[i] == name) return kAllActivations[i];
    }
    return std::nullopt;
}

double apply_activation(Activation a, double v) noexcept
{
    using std::numbers::pi;
    switch (a) {
    case Activation::Sine: return std::sin(pi * v);
    case Activation::NegSine: return -std::sin(pi * v);
    case Activation::Abs: return std::abs(v);
    case Activation::NegAbs: return -std::abs(v);
    case Activation::Square: {
        const double c = clamp(v, 10.0);
        return c * c;
    }
    case Activation::NegSquare: {
        const double c = clamp(v, 10.0);
        return -(c * c);
    }
    case Activation::SqrtAbs: return std::sqrt(std::abs(v));
    case Activation::NegSqrtAbs: return -std::sqrt(std::abs(v));
    case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-clamp(5.0 * v, 60.0)));
    case Activation::Clamped: return clamp(v, 1.0);
    case Activation::Cube: {
        const double c = clamp(v, 10.0);
        return c * c * c;
    }
    case Activation::Exp: return std::exp(clamp(v, 10.0));
    case Activation::Gauss: return std::exp(-5.0 * v * v);
    case Activation::Hat: return std::max(0.0, 1.0 - std::abs(v));
    case Activation::Identity: return v;
    case Activation::Inverse: return v / (v * v + kInverseEps);
    case Activation::Log: return std::log(std::max(std::abs(v), kLogFloor));
    case Activation::Relu: return std::max(0.0, v);
    case Activation::Selu: return v > 0 ? kSeluScale * v : kSeluScale * kSeluAlpha * std::expm1(clamp(v, 60.0));
    case Activation::Lelu: return v > 0 ? v : 0.005 * v;
    case Activation::Elu: return v > 0 ? v : std::expm1(clamp(v, 60.0));
    case Activation::Softplus: return 0.2 * std::log1p(std::exp(clamp(5.0 * v, 60.0)));
    case Activation::Tanh: return std::tanh(2.5 * v);
    }
    return v;
}

}  // namespace voxevo
