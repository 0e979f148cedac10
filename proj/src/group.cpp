#include "comolife/group.hpp"

#include <algorithm>
#include <sstream>

namespace comolife {

namespace {

void check_time(double t) {
    if (!(t >= 0.0)) {
        std::ostringstream os;
        os << "time " << t << " must be >= 0";
        throw DomainError(os.str());
    }
}

void check_cause(const GroupStatus& group, std::size_t cause) {
    if (cause >= group.causes()) {
        std::ostringstream os;
        os << "cause index " << cause << " out of range (group has " << group.causes() << " causes)";
        throw DomainError(os.str());
    }
}

void check_vector(const GroupStatus& group, const GroupTimeVector& v) {
    check_cause(group, v.cause);
    if (v.times.size() != group.lives()) {
        std::ostringstream os;
        os << "time vector for cause " << v.cause << " has " << v.times.size() << " entries, group has "
           << group.lives() << " lives";
        throw DomainError(os.str());
    }
    for (double t : v.times) check_time(t);
}

void check_vectors(const GroupStatus& group, const CopulaSpec& copula,
                   std::span<const GroupTimeVector> times) {
    if (times.size() != group.causes()) {
        std::ostringstream os;
        os << "expected one time vector per cause (" << group.causes() << "), got " << times.size();
        throw DomainError(os.str());
    }
    if (copula.dimension() != group.causes()) {
        std::ostringstream os;
        os << "copula dimension " << copula.dimension() << " does not match " << group.causes()
           << " causes";
        throw DomainError(os.str());
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i].cause != i) throw DomainError("time vectors must be listed in cause order");
        check_vector(group, times[i]);
    }
}

double max_cdf(const GroupStatus& group, const GroupTimeVector& v) {
    double f = 0.0;
    for (std::size_t l = 0; l < group.lives(); ++l)
        f = std::max(f, group.marginal(l, v.cause).cdf(v.times[l]));
    return f;
}

double min_cdf(const GroupStatus& group, const GroupTimeVector& v) {
    double f = 1.0;
    for (std::size_t l = 0; l < group.lives(); ++l)
        f = std::min(f, group.marginal(l, v.cause).cdf(v.times[l]));
    return f;
}

} // namespace

std::string_view to_string(Status status) {
    return status == Status::joint_survival ? "joint_survival" : "last_survivor";
}

Status parse_status(std::string_view name) {
    if (name == "joint_survival") return Status::joint_survival;
    if (name == "last_survivor") return Status::last_survivor;
    throw DomainError("unknown status '" + std::string(name) + "' (joint_survival|last_survivor)");
}

std::string_view to_string(SurvivalComposition mode) {
    return mode == SurvivalComposition::literal ? "literal" : "consistent";
}

SurvivalComposition parse_composition(std::string_view name) {
    if (name == "literal") return SurvivalComposition::literal;
    if (name == "consistent") return SurvivalComposition::consistent;
    throw DomainError("unknown composition mode '" + std::string(name) + "' (literal|consistent)");
}

GroupStatus::GroupStatus(std::vector<Life> lives, Status status)
    : lives_(std::move(lives)), status_(status) {
    if (lives_.empty()) throw DomainError("a group needs at least one life");
    const std::size_t m = lives_.front().causes.size();
    if (m < 2) throw DomainError("a group needs at least two causes of decrement");
    for (const auto& life : lives_) {
        if (life.causes.size() != m) {
            std::ostringstream os;
            os << "life '" << life.id << "' has " << life.causes.size() << " cause marginals, expected " << m;
            throw DomainError(os.str());
        }
    }
}

std::vector<NetSurvival> GroupStatus::cause_marginals(std::size_t cause) const {
    check_cause(*this, cause);
    std::vector<NetSurvival> out;
    out.reserve(lives_.size());
    for (const auto& life : lives_) out.push_back(life.causes[cause]);
    return out;
}

double comonotonic_joint_cdf(std::span<const NetSurvival> marginals, std::span<const double> x) {
    if (marginals.size() != x.size() || marginals.empty()) {
        std::ostringstream os;
        os << "comonotonic_joint_cdf: " << marginals.size() << " marginals vs " << x.size() << " points";
        throw DomainError(os.str());
    }
    double f = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        check_time(x[i]);
        f = std::min(f, marginals[i].cdf(x[i]));
    }
    return f;
}

double status_cause_cdf(const GroupStatus& group, std::size_t cause, double t) {
    check_cause(group, cause);
    check_time(t);
    const GroupTimeVector v{cause, std::vector<double>(group.lives(), t)};
    return group.status() == Status::joint_survival ? max_cdf(group, v) : min_cdf(group, v);
}

double total_decrement_from_status_cdfs(const CopulaSpec& copula, std::span<const double> status_cdfs) {
    std::vector<double> s(status_cdfs.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = 1.0 - status_cdfs[i];
    return 1.0 - survival_copula_value(copula, s);
}

double status_total_decrement(const GroupStatus& group, const CopulaSpec& copula, double t) {
    check_time(t);
    std::vector<double> cdfs(group.causes());
    for (std::size_t i = 0; i < cdfs.size(); ++i) cdfs[i] = status_cause_cdf(group, i, t);
    return total_decrement_from_status_cdfs(copula, cdfs);
}

double group_vector_survival(const GroupStatus& group, const GroupTimeVector& times) {
    check_vector(group, times);
    return 1.0 - max_cdf(group, times);
}

double group_joint_cdf(const GroupStatus& group, const CopulaSpec& copula,
                       std::span<const GroupTimeVector> times) {
    check_vectors(group, copula, times);
    std::vector<double> u(times.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = min_cdf(group, times[i]);
    return copula_cdf(copula, u);
}

double group_joint_survival(const GroupStatus& group, const CopulaSpec& copula,
                            std::span<const GroupTimeVector> times, SurvivalComposition mode) {
    check_vectors(group, copula, times);
    std::vector<double> s(times.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = 1.0 - max_cdf(group, times[i]);
    return mode == SurvivalComposition::literal ? copula_cdf(copula, s)
                                                : survival_copula_value(copula, s);
}

double representative_joint_cdf(const GroupStatus& group, const CopulaSpec& copula,
                                std::span<const GroupTimeVector> times, std::size_t life) {
    check_vectors(group, copula, times);
    if (life >= group.lives()) throw DomainError("representative life index out of range");
    std::vector<double> u(times.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = group.marginal(life, i).cdf(times[i].times[life]);
    return copula_cdf(copula, u);
}

double group_envelope_cdf(const GroupStatus& group, const CopulaSpec& copula,
                          std::span<const GroupTimeVector> times) {
    check_vectors(group, copula, times);
    std::vector<double> u(times.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = max_cdf(group, times[i]);
    return copula_cdf(copula, u);
}

} // namespace comolife
