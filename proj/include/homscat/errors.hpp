#pragma once

#include <stdexcept>
#include <string>

namespace homscat {

// All toolkit errors derive from Error so callers can catch one base type.
// The pipeline maps certificate failures (transversality, resonance, ...)
// to exit code 2, everything else to 1.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DomainEscape : Error {
    using Error::Error;
};
struct NonSymplecticJacobian : Error {
    using Error::Error;
};
struct InverseDivergence : Error {
    using Error::Error;
};
struct NewtonDivergence : Error {
    using Error::Error;
};

// model construction
struct StrongResonance : Error {
    using Error::Error;
};
struct ZeroTwist : Error {
    using Error::Error;
};
struct NonSymplecticM : Error {
    using Error::Error;
};
struct TransversalityFailure : Error {
    using Error::Error;
};
struct GluingOverlap : Error {
    using Error::Error;
};

// spectra / normal forms
struct NotOneElliptic : Error {
    using Error::Error;
};
struct BadCurveData : Error {
    using Error::Error;
};
struct IllConditionedHomological : Error {
    using Error::Error;
};

// scattering
struct DecayFitFailure : Error {
    using Error::Error;
};
struct NoContraction : Error {
    using Error::Error;
};
struct NeverSettles : Error {
    using Error::Error;
};

// center dynamics
struct CenterNotInvariant : Error {
    using Error::Error;
};
struct EscapedAnnulus : Error {
    using Error::Error;
};
struct SectionMiss : Error {
    using Error::Error;
};

// sigma analysis
struct ChartTooLarge : Error {
    using Error::Error;
};
struct SelfIntersecting : Error {
    using Error::Error;
};

// cli / io
struct ParseError : Error {
    using Error::Error;
};
struct ValidationError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

}  // namespace homscat
