#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace voxevo {

enum class Activation {
    Sine,
    NegSine,
    Abs,
    NegAbs,
    Square,
    NegSquare,
    SqrtAbs,
    NegSqrtAbs,
    Sigmoid,
    Clamped,
    Cube,
    Exp,
    Gauss,
    Hat,
    Identity,
    Inverse,
    Log,
    Relu,
    Selu,
    Lelu,
    Elu,
    Softplus,
    Tanh,
};

inline constexpr std::size_t kActivationCount = 23;

inline constexpr std::array<Activation, kActivationCount> kAllActivations{
    Activation::Sine,    Activation::NegSine,  Activation::Abs,      Activation::NegAbs,  Activation::Square,
    Activation::NegSquare, Activation::SqrtAbs, Activation::NegSqrtAbs, Activation::Sigmoid, Activation::Clamped,
    Activation::Cube,    Activation::Exp,      Activation::Gauss,    Activation::Hat,     Activation::Identity,
    Activation::Inverse, Activation::Log,      Activation::Relu,     Activation::Selu,    Activation::Lelu,
    Activation::Elu,     Activation::Softplus, Activation::Tanh,
};

std::string_view activation_name(Activation a) noexcept;
std::optional<Activation> activation_from_name(std::string_view name) noexcept;

/// Total on finite inputs: singular points are regularized and arguments of
/// fast-growing functions are clamped so the result is always finite.
double apply_activation(Activation a, double v) noexcept;

}  // namespace voxevo
