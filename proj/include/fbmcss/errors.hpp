#ifndef FBMCSS_ERRORS_HPP
#define FBMCSS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fbmcss {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// invalid numerology, stream map, or preset
struct ConfigError : Error {
    using Error::Error;
};

// argument outside an operation's mathematical domain
struct DomainError : Error {
    using Error::Error;
};

// prototype filter invariants unachievable at the requested length
struct DesignError : Error {
    DesignError(const std::string& what, double measured_isi_db)
        : Error(what), measured_isi_db(measured_isi_db) {}
    double measured_isi_db;
};

// symbol/slot framing mismatch
struct FramingError : Error {
    using Error::Error;
};

// PSD / noise estimation failures (too little data, no measurement segment)
struct EstimationError : Error {
    using Error::Error;
};

// frequency outside spectral-mask table coverage
struct CoverageError : Error {
    using Error::Error;
};

// PSD resolution too coarse for compliance checking
struct MeasurementError : Error {
    using Error::Error;
};

// no feasible subcarrier activation under the mask
struct PlanningError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

} // namespace fbmcss

#endif
