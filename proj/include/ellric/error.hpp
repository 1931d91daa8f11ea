#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ellric {

enum class errc {
    non_convergent,
    pole_proximity,
    no_convergence,
    level_mismatch,
    combinatorial_blowup,
    orbit_cap_exceeded,
    calibration_failed,
    zero_coefficient_a,
    zero_coefficient_b,
    sample_degeneracy,
    non_torsion_violated,
    invalid_input,
};

inline std::string_view to_string(errc code)
{
    switch (code) {
    case errc::non_convergent: return "NonConvergent";
    case errc::pole_proximity: return "PoleProximity";
    case errc::no_convergence: return "NoConvergence";
    case errc::level_mismatch: return "LevelMismatch";
    case errc::combinatorial_blowup: return "CombinatorialBlowup";
    case errc::orbit_cap_exceeded: return "OrbitCapExceeded";
    case errc::calibration_failed: return "CalibrationFailed";
    case errc::zero_coefficient_a: return "ZeroCoefficientA";
    case errc::zero_coefficient_b: return "ZeroCoefficientB";
    case errc::sample_degeneracy: return "SampleDegeneracy";
    case errc::non_torsion_violated: return "NonTorsionViolated";
    case errc::invalid_input: return "InvalidInput";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), message_(what)
    {
    }

    errc code() const noexcept { return code_; }
    /// The description without the code prefix.
    const std::string& message() const noexcept { return message_; }

private:
    errc code_;
    std::string message_;
};

} // namespace ellric
