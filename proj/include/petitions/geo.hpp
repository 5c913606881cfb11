#ifndef PETITIONS_GEO_HPP
#define PETITIONS_GEO_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "petitions/corpus.hpp"
#include "petitions/lda.hpp"

namespace petitions::geo {

struct ConstituencyProfile {
    ConstituencyMeta meta;
    std::int64_t total_signatures = 0;
    double per_elector = 0.0;
    std::optional<Eigen::VectorXd> issue_share;  ///< S_ci / S_c; unset without signatures
    std::optional<Eigen::VectorXd> z_scores;
    std::optional<int> cluster;
};

/// Signature mass per constituency and issue: S(c, i) = sum_d sig(d, c) theta(d, i).
/// Rows follow `meta`; signatures under unknown codes are ignored.
Eigen::MatrixXd issue_signatures(const lda::TopicModel& model, const Corpus& corpus,
                                 const std::vector<ConstituencyMeta>& meta);

/// Shares and z-scores from an issue-signature matrix. Shares are standardized per issue
/// across constituencies with signatures, using the sample (n - 1) standard deviation.
std::vector<ConstituencyProfile> profiles_from_issue_signatures(const std::vector<ConstituencyMeta>& meta,
                                                                const Eigen::MatrixXd& issue_signatures);

std::vector<ConstituencyProfile> profile_constituencies(const lda::TopicModel& model, const Corpus& corpus,
                                                        const std::vector<ConstituencyMeta>& meta);

// ---------------------------------------------------------------------------
// Scaling of signatures with electorate size

enum class ScalingMode { raw, binned };

struct ScalingFit {
    double exponent = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    ScalingMode mode = ScalingMode::raw;
    std::size_t n = 0;  ///< points in the regression (constituencies or bins)
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Ordinary least squares y = intercept + slope x.
template <typename DerivedX, typename DerivedY>
LinearFit least_squares(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw ValidationError("least squares needs two or more paired observations");
    const double mx = x.mean();
    const double my = y.mean();
    const double sxx = (x.array() - mx).square().sum();
    if (!(sxx > 0.0))
        throw ValidationError("least squares: predictor has zero variance");
    const double sxy = ((x.array() - mx) * (y.array() - my)).sum();
    const double syy = (y.array() - my).square().sum();
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
    return f;
}

/// ln(total signatures) on ln(electorate). Binned mode sorts by electorate into
/// `bins` equal-count groups and regresses the per-bin means of the logs.
ScalingFit scaling_fit(const std::vector<ConstituencyProfile>& profiles, ScalingMode mode, int bins = 10);

// ---------------------------------------------------------------------------
// Partition Around Medoids

enum class Metric { euclidean, manhattan };

/// Pairwise distances between the rows of `points`.
Eigen::MatrixXd distance_matrix(const Eigen::MatrixXd& points, Metric metric = Metric::euclidean);

struct ClusterResult {
    int k = 0;
    std::vector<int> medoid_indices;
    std::vector<int> assignments;  ///< cluster id per point; -1 for points left out
    double total_cost = 0.0;
    std::vector<double> cost_trace;  ///< BUILD cost, then the cost after each swap
};

/// Sum over points of the distance to the closest medoid.
double medoid_cost(const Eigen::MatrixXd& distances, const std::vector<int>& medoids);

/// BUILD then steepest-descent SWAP until no single medoid/non-medoid exchange lowers the
/// cost. Exact ties in BUILD are broken by `seed`; SWAP ties go to the lowest index pair.
ClusterResult pam(const Eigen::MatrixXd& distances, int k, std::uint64_t seed = 0);

/// PAM over the z-score vectors of profiles that have them. Indices in the result refer
/// to positions in `profiles`.
ClusterResult pam_cluster(const std::vector<ConstituencyProfile>& profiles, int k, std::uint64_t seed = 0,
                          Metric metric = Metric::euclidean);

/// Writes result assignments into the profiles' `cluster` fields.
void assign_clusters(std::vector<ConstituencyProfile>& profiles, const ClusterResult& result);

/// Mean silhouette width; points in singleton clusters score 0.
double silhouette(const Eigen::MatrixXd& distances, const std::vector<int>& assignments);

struct SilhouettePoint {
    int k = 0;
    double silhouette = 0.0;
    double total_cost = 0.0;
};

std::vector<SilhouettePoint> silhouette_sweep(const std::vector<ConstituencyProfile>& profiles, int k_min, int k_max,
                                              std::uint64_t seed = 0, Metric metric = Metric::euclidean);

/// Mean issue share per cluster (k x K).
Eigen::MatrixXd cluster_issue_profile(const ClusterResult& result, const std::vector<ConstituencyProfile>& profiles);

// ---------------------------------------------------------------------------
// Exports

void write_profiles_csv(std::ostream& out, const std::vector<ConstituencyProfile>& profiles, int k,
                        const MetadataHeader& header);
void write_scaling_json(std::ostream& out, const ScalingFit& fit, const MetadataHeader& header);
void write_clusters_csv(std::ostream& out, const std::vector<ConstituencyProfile>& profiles, const ClusterResult& result,
                        const MetadataHeader& header);
void write_cluster_profile_csv(std::ostream& out, const Eigen::MatrixXd& cluster_means,
                               const std::vector<std::string>& names, const MetadataHeader& header);

} // namespace petitions::geo

#endif
