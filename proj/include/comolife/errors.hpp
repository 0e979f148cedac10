#ifndef COMOLIFE_ERRORS_HPP
#define COMOLIFE_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace comolife {

// Base of every error the library throws. kind() is a stable tag used in the
// CLI's structured error objects.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "Error"; }
};

#define COMOLIFE_DEFINE_ERROR(Name)                                   \
    class Name : public Error {                                       \
    public:                                                           \
        using Error::Error;                                           \
        const char* kind() const noexcept override { return #Name; }  \
    }

COMOLIFE_DEFINE_ERROR(DomainError);
COMOLIFE_DEFINE_ERROR(CapacityError);
COMOLIFE_DEFINE_ERROR(NonDifferentiable);
COMOLIFE_DEFINE_ERROR(NumericalError);
COMOLIFE_DEFINE_ERROR(MonotonicityError);
COMOLIFE_DEFINE_ERROR(ValidationError);
COMOLIFE_DEFINE_ERROR(NotFound);
COMOLIFE_DEFINE_ERROR(UnsupportedDimension);
COMOLIFE_DEFINE_ERROR(EmptySample);
COMOLIFE_DEFINE_ERROR(ConfigError);
COMOLIFE_DEFINE_ERROR(IoError);

#undef COMOLIFE_DEFINE_ERROR

// Newton failure during the forward march; carries where and how badly.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, std::size_t step, double residual)
        : Error(what), step_(step), residual_(residual) {}
    const char* kind() const noexcept override { return "ConvergenceError"; }
    std::size_t step() const noexcept { return step_; }
    double residual() const noexcept { return residual_; }

private:
    std::size_t step_;
    double residual_;
};

} // namespace comolife

#endif // COMOLIFE_ERRORS_HPP
