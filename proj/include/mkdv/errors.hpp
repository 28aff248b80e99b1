#ifndef MKDV_ERRORS_HPP
#define MKDV_ERRORS_HPP

#include <complex>
#include <stdexcept>
#include <string>

namespace mkdv {

// Thrown when an adaptive scheme runs out of refinement budget. Carries the
// best value obtained and the error bound actually achieved.
class accuracy_error : public std::runtime_error {
public:
    accuracy_error(const std::string& what, std::complex<double> estimate, double achieved)
        : std::runtime_error(what), estimate_(estimate), achieved_(achieved) {}

    std::complex<double> estimate() const { return estimate_; }
    double achieved() const { return achieved_; }

private:
    std::complex<double> estimate_;
    double achieved_;
};

// Thrown when an iterative solver cannot bracket or refine a root.
class solver_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace mkdv

#endif
