#ifndef COMOLIFE_GROUP_HPP
#define COMOLIFE_GROUP_HPP

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "comolife/copulas.hpp"
#include "comolife/marginals.hpp"

namespace comolife {

enum class Status { joint_survival, last_survivor };

std::string_view to_string(Status status);
Status parse_status(std::string_view name);

// One member of the group with a net law per cause, in cause order.
struct Life {
    std::string id;
    std::vector<NetSurvival> causes;
};

// A comonotonic group of n >= 1 lives, each exposed to the same m >= 2 causes,
// together with the status rule that decides when the group fails.
class GroupStatus {
public:
    GroupStatus(std::vector<Life> lives, Status status);

    std::size_t lives() const noexcept { return lives_.size(); }
    std::size_t causes() const noexcept { return lives_.front().causes.size(); }
    Status status() const noexcept { return status_; }
    const std::vector<Life>& members() const noexcept { return lives_; }

    const NetSurvival& marginal(std::size_t life, std::size_t cause) const {
        return lives_[life].causes[cause];
    }

    // Net laws of every life for one cause.
    std::vector<NetSurvival> cause_marginals(std::size_t cause) const;

private:
    std::vector<Life> lives_;
    Status status_;
};

// Per-life times (t_1, ..., t_n) attached to one cause.
struct GroupTimeVector {
    std::size_t cause;
    std::vector<double> times;
};

// How the joint survival of the cause vectors is assembled from the vector
// survivals: `literal` feeds them to C itself, `consistent` to the survival
// copula of C, which is the law the group sampler draws from.
enum class SurvivalComposition { literal, consistent };

std::string_view to_string(SurvivalComposition mode);
SurvivalComposition parse_composition(std::string_view name);

// min_i F_i(x_i): the joint CDF of a comonotonic vector.
double comonotonic_joint_cdf(std::span<const NetSurvival> marginals, std::span<const double> x);

// Distribution of the status's lifetime from one cause: the largest per-life
// decrement probability for joint survival, the smallest for last survivor.
double status_cause_cdf(const GroupStatus& group, std::size_t cause, double t);

// Probability that the status has failed from any cause by t.
double status_total_decrement(const GroupStatus& group, const CopulaSpec& copula, double t);

// Same, from precomputed status CDFs (one per cause).
double total_decrement_from_status_cdfs(const CopulaSpec& copula, std::span<const double> status_cdfs);

// P(T_i(x_1) > t_1, ..., T_i(x_n) > t_n) = 1 - max_l F_il(t_l).
double group_vector_survival(const GroupStatus& group, const GroupTimeVector& times);

// C(min_l F_1l(t_1l), ..., min_l F_ml(t_ml)). `times` holds one vector per
// cause, in cause order.
double group_joint_cdf(const GroupStatus& group, const CopulaSpec& copula,
                       std::span<const GroupTimeVector> times);

double group_joint_survival(const GroupStatus& group, const CopulaSpec& copula,
                            std::span<const GroupTimeVector> times,
                            SurvivalComposition mode = SurvivalComposition::consistent);

// C applied to one representative life's marginal CDFs.
double representative_joint_cdf(const GroupStatus& group, const CopulaSpec& copula,
                                std::span<const GroupTimeVector> times, std::size_t life);

// C(max_l F_1l(t_1l), ..., max_l F_ml(t_ml)); dominates every
// representative_joint_cdf just as group_joint_cdf is dominated by them.
double group_envelope_cdf(const GroupStatus& group, const CopulaSpec& copula,
                          std::span<const GroupTimeVector> times);

} // namespace comolife

#endif // COMOLIFE_GROUP_HPP
