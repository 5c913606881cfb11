#include "petitions/geo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace petitions::geo {

Eigen::MatrixXd issue_signatures(const lda::TopicModel& model, const Corpus& corpus,
                                 const std::vector<ConstituencyMeta>& meta) {
    if (model.num_docs() != static_cast<Eigen::Index>(corpus.size()))
        throw ValidationError("model and corpus differ in document count");
    std::unordered_map<std::string, Eigen::Index> row;
    for (std::size_t c = 0; c < meta.size(); ++c)
        row.emplace(meta[c].code, static_cast<Eigen::Index>(c));
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(meta.size()), model.num_topics());
    for (std::size_t d = 0; d < corpus.size(); ++d) {
        for (const auto& [code, n] : corpus.petitions[d].signatures_by_constituency) {
            auto it = row.find(code);
            if (it == row.end() || n == 0)
                continue;
            s.row(it->second) += static_cast<double>(n) * model.theta.row(static_cast<Eigen::Index>(d));
        }
    }
    return s;
}

std::vector<ConstituencyProfile> profiles_from_issue_signatures(const std::vector<ConstituencyMeta>& meta,
                                                                const Eigen::MatrixXd& issue_signatures) {
    if (static_cast<Eigen::Index>(meta.size()) != issue_signatures.rows())
        throw ValidationError("constituency metadata and issue-signature rows differ in length");
    const Eigen::Index k = issue_signatures.cols();
    std::vector<ConstituencyProfile> profiles(meta.size());
    std::vector<Eigen::Index> included;
    for (std::size_t c = 0; c < meta.size(); ++c) {
        auto& p = profiles[c];
        p.meta = meta[c];
        if (p.meta.electorate <= 0)
            throw ValidationError("constituency " + p.meta.code + " has a non-positive electorate");
        const double total = issue_signatures.row(static_cast<Eigen::Index>(c)).sum();
        p.total_signatures = std::llround(total);
        p.per_elector = static_cast<double>(p.total_signatures) / static_cast<double>(p.meta.electorate);
        if (total > 0.0) {
            p.issue_share = issue_signatures.row(static_cast<Eigen::Index>(c)).transpose() / total;
            included.push_back(static_cast<Eigen::Index>(c));
        }
    }
    if (included.size() < 2)
        return profiles;

    Eigen::MatrixXd shares(static_cast<Eigen::Index>(included.size()), k);
    for (std::size_t i = 0; i < included.size(); ++i)
        shares.row(static_cast<Eigen::Index>(i)) = profiles[static_cast<std::size_t>(included[i])].issue_share->transpose();
    const Eigen::RowVectorXd mean = shares.colwise().mean();
    const Eigen::MatrixXd centered = shares.rowwise() - mean;
    const Eigen::RowVectorXd sd =
        (centered.array().square().colwise().sum() / static_cast<double>(shares.rows() - 1)).sqrt();
    for (std::size_t i = 0; i < included.size(); ++i) {
        Eigen::VectorXd z(k);
        for (Eigen::Index j = 0; j < k; ++j)
            z(j) = sd(j) > 0.0 ? centered(static_cast<Eigen::Index>(i), j) / sd(j) : 0.0;
        profiles[static_cast<std::size_t>(included[i])].z_scores = std::move(z);
    }
    return profiles;
}

std::vector<ConstituencyProfile> profile_constituencies(const lda::TopicModel& model, const Corpus& corpus,
                                                        const std::vector<ConstituencyMeta>& meta) {
    return profiles_from_issue_signatures(meta, issue_signatures(model, corpus, meta));
}

ScalingFit scaling_fit(const std::vector<ConstituencyProfile>& profiles, ScalingMode mode, int bins) {
    std::vector<std::pair<double, double>> points;  // (ln electorate, ln signatures)
    for (const auto& p : profiles)
        if (p.total_signatures > 0 && p.meta.electorate > 0)
            points.emplace_back(std::log(static_cast<double>(p.meta.electorate)),
                                std::log(static_cast<double>(p.total_signatures)));
    if (points.size() < 3)
        throw ValidationError("scaling fit needs at least three constituencies with signatures");

    Eigen::VectorXd x;
    Eigen::VectorXd y;
    if (mode == ScalingMode::raw) {
        x.resize(static_cast<Eigen::Index>(points.size()));
        y.resize(x.size());
        for (std::size_t i = 0; i < points.size(); ++i) {
            x(static_cast<Eigen::Index>(i)) = points[i].first;
            y(static_cast<Eigen::Index>(i)) = points[i].second;
        }
    } else {
        if (bins < 2)
            throw ValidationError("binned scaling fit needs at least two bins");
        std::stable_sort(points.begin(), points.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        const auto n = points.size();
        const auto b = std::min<std::size_t>(static_cast<std::size_t>(bins), n);
        x.resize(static_cast<Eigen::Index>(b));
        y.resize(x.size());
        for (std::size_t i = 0; i < b; ++i) {
            const std::size_t first = n * i / b;
            const std::size_t last = n * (i + 1) / b;
            double sx = 0.0;
            double sy = 0.0;
            for (std::size_t j = first; j < last; ++j) {
                sx += points[j].first;
                sy += points[j].second;
            }
            x(static_cast<Eigen::Index>(i)) = sx / static_cast<double>(last - first);
            y(static_cast<Eigen::Index>(i)) = sy / static_cast<double>(last - first);
        }
    }
    const LinearFit f = least_squares(x, y);
    return {f.slope, f.intercept, f.r_squared, mode, static_cast<std::size_t>(x.size())};
}

Eigen::MatrixXd distance_matrix(const Eigen::MatrixXd& points, Metric metric) {
    const Eigen::Index n = points.rows();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const auto diff = points.row(i) - points.row(j);
            d(i, j) = d(j, i) = metric == Metric::euclidean ? diff.norm() : diff.cwiseAbs().sum();
        }
    }
    return d;
}

double medoid_cost(const Eigen::MatrixXd& distances, const std::vector<int>& medoids) {
    double cost = 0.0;
    for (Eigen::Index j = 0; j < distances.rows(); ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (int m : medoids)
            best = std::min(best, distances(m, j));
        cost += best;
    }
    return cost;
}

namespace {

struct Nearest {
    std::vector<int> first;        // position in the medoid list of the nearest medoid
    std::vector<double> d_first;
    std::vector<double> d_second;
};

Nearest nearest_medoids(const Eigen::MatrixXd& d, const std::vector<int>& medoids) {
    const auto n = static_cast<std::size_t>(d.rows());
    Nearest out{std::vector<int>(n, 0), std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t j = 0; j < n; ++j) {
        double best = std::numeric_limits<double>::infinity();
        double second = std::numeric_limits<double>::infinity();
        int best_pos = 0;
        for (std::size_t m = 0; m < medoids.size(); ++m) {
            const double v = d(medoids[m], static_cast<Eigen::Index>(j));
            if (v < best) {
                second = best;
                best = v;
                best_pos = static_cast<int>(m);
            } else if (v < second) {
                second = v;
            }
        }
        out.first[j] = best_pos;
        out.d_first[j] = best;
        out.d_second[j] = second;
    }
    return out;
}

} // namespace

ClusterResult pam(const Eigen::MatrixXd& d, int k, std::uint64_t seed) {
    const auto n = static_cast<int>(d.rows());
    if (d.rows() != d.cols())
        throw ValidationError("PAM needs a square distance matrix");
    if (k <= 0 || k >= n)
        throw ValidationError("PAM needs 0 < k < n (k = " + std::to_string(k) + ", n = " + std::to_string(n) + ")");

    std::mt19937_64 rng(splitmix64(seed));
    const auto pick_tied = [&](const std::vector<int>& tied) {
        if (tied.size() == 1)
            return tied.front();
        return tied[static_cast<std::size_t>(rng() % tied.size())];
    };

    // BUILD
    std::vector<int> medoids;
    std::vector<bool> is_medoid(static_cast<std::size_t>(n), false);
    {
        std::vector<int> tied;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            const double total = d.row(i).sum();
            if (total < best) {
                best = total;
                tied = {i};
            } else if (total == best) {
                tied.push_back(i);
            }
        }
        medoids.push_back(pick_tied(tied));
        is_medoid[static_cast<std::size_t>(medoids.back())] = true;
    }
    Eigen::VectorXd nearest = d.row(medoids.front()).transpose();
    while (static_cast<int>(medoids.size()) < k) {
        std::vector<int> tied;
        double best_gain = -1.0;
        for (int i = 0; i < n; ++i) {
            if (is_medoid[static_cast<std::size_t>(i)])
                continue;
            const double gain = (nearest - d.col(i)).cwiseMax(0.0).sum();
            if (gain > best_gain) {
                best_gain = gain;
                tied = {i};
            } else if (gain == best_gain) {
                tied.push_back(i);
            }
        }
        const int chosen = pick_tied(tied);
        medoids.push_back(chosen);
        is_medoid[static_cast<std::size_t>(chosen)] = true;
        nearest = nearest.cwiseMin(d.col(chosen));
    }

    ClusterResult result;
    result.k = k;
    double cost = nearest.sum();
    result.cost_trace.push_back(cost);

    // SWAP
    for (;;) {
        const Nearest nm = nearest_medoids(d, medoids);
        double best_delta = 0.0;
        int best_m = -1;
        int best_h = -1;
        for (int m = 0; m < k; ++m) {
            for (int h = 0; h < n; ++h) {
                if (is_medoid[static_cast<std::size_t>(h)])
                    continue;
                double delta = 0.0;
                for (int j = 0; j < n; ++j) {
                    const auto ju = static_cast<std::size_t>(j);
                    const double dh = d(h, j);
                    const double base = nm.first[ju] == m ? nm.d_second[ju] : nm.d_first[ju];
                    delta += std::min(base, dh) - nm.d_first[ju];
                }
                if (delta < best_delta) {
                    best_delta = delta;
                    best_m = m;
                    best_h = h;
                }
            }
        }
        const double tolerance = 1e-12 * std::max(1.0, cost);
        if (best_m < 0 || best_delta >= -tolerance)
            break;
        is_medoid[static_cast<std::size_t>(medoids[static_cast<std::size_t>(best_m)])] = false;
        is_medoid[static_cast<std::size_t>(best_h)] = true;
        medoids[static_cast<std::size_t>(best_m)] = best_h;
        cost = medoid_cost(d, medoids);
        result.cost_trace.push_back(cost);
    }

    const Nearest final_nm = nearest_medoids(d, medoids);
    result.medoid_indices = medoids;
    result.assignments = final_nm.first;
    // A medoid always belongs to its own cluster, even when another medoid is equally close.
    for (int m = 0; m < k; ++m)
        result.assignments[static_cast<std::size_t>(medoids[static_cast<std::size_t>(m)])] = m;
    result.total_cost = cost;
    return result;
}

ClusterResult pam_cluster(const std::vector<ConstituencyProfile>& profiles, int k, std::uint64_t seed, Metric metric) {
    std::vector<int> index;
    for (std::size_t i = 0; i < profiles.size(); ++i)
        if (profiles[i].z_scores)
            index.push_back(static_cast<int>(i));
    if (index.empty())
        throw ValidationError("no constituency has z-scores to cluster");
    const Eigen::Index dims = profiles[static_cast<std::size_t>(index.front())].z_scores->size();
    Eigen::MatrixXd points(static_cast<Eigen::Index>(index.size()), dims);
    for (std::size_t i = 0; i < index.size(); ++i)
        points.row(static_cast<Eigen::Index>(i)) = profiles[static_cast<std::size_t>(index[i])].z_scores->transpose();

    ClusterResult local = pam(distance_matrix(points, metric), k, seed);
    ClusterResult out = local;
    out.assignments.assign(profiles.size(), -1);
    for (std::size_t i = 0; i < index.size(); ++i)
        out.assignments[static_cast<std::size_t>(index[i])] = local.assignments[i];
    for (auto& m : out.medoid_indices)
        m = index[static_cast<std::size_t>(m)];
    return out;
}

void assign_clusters(std::vector<ConstituencyProfile>& profiles, const ClusterResult& result) {
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        const int c = result.assignments[i];
        profiles[i].cluster = c >= 0 ? std::optional<int>(c) : std::nullopt;
    }
}

double silhouette(const Eigen::MatrixXd& d, const std::vector<int>& assignments) {
    const auto n = static_cast<Eigen::Index>(assignments.size());
    const int k = *std::max_element(assignments.begin(), assignments.end()) + 1;
    std::vector<int> sizes(static_cast<std::size_t>(k), 0);
    for (int a : assignments)
        ++sizes[static_cast<std::size_t>(a)];
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const int own = assignments[static_cast<std::size_t>(i)];
        if (sizes[static_cast<std::size_t>(own)] <= 1)
            continue;
        std::vector<double> sums(static_cast<std::size_t>(k), 0.0);
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i)
                sums[static_cast<std::size_t>(assignments[static_cast<std::size_t>(j)])] += d(i, j);
        const double a = sums[static_cast<std::size_t>(own)] / (sizes[static_cast<std::size_t>(own)] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c)
            if (c != own && sizes[static_cast<std::size_t>(c)] > 0)
                b = std::min(b, sums[static_cast<std::size_t>(c)] / sizes[static_cast<std::size_t>(c)]);
        const double denom = std::max(a, b);
        if (denom > 0.0 && std::isfinite(b))
            total += (b - a) / denom;
    }
    return total / static_cast<double>(n);
}

std::vector<SilhouettePoint> silhouette_sweep(const std::vector<ConstituencyProfile>& profiles, int k_min, int k_max,
                                              std::uint64_t seed, Metric metric) {
    std::vector<int> index;
    for (std::size_t i = 0; i < profiles.size(); ++i)
        if (profiles[i].z_scores)
            index.push_back(static_cast<int>(i));
    if (index.empty())
        return {};
    Eigen::MatrixXd points(static_cast<Eigen::Index>(index.size()),
                           profiles[static_cast<std::size_t>(index.front())].z_scores->size());
    for (std::size_t i = 0; i < index.size(); ++i)
        points.row(static_cast<Eigen::Index>(i)) = profiles[static_cast<std::size_t>(index[i])].z_scores->transpose();
    const Eigen::MatrixXd d = distance_matrix(points, metric);
    std::vector<SilhouettePoint> out;
    for (int k = std::max(2, k_min); k <= k_max && k < static_cast<int>(index.size()); ++k) {
        const ClusterResult r = pam(d, k, seed);
        out.push_back({k, silhouette(d, r.assignments), r.total_cost});
    }
    return out;
}

Eigen::MatrixXd cluster_issue_profile(const ClusterResult& result, const std::vector<ConstituencyProfile>& profiles) {
    Eigen::Index dims = 0;
    for (const auto& p : profiles)
        if (p.issue_share)
            dims = p.issue_share->size();
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(result.k, dims);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(result.k);
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        const int c = result.assignments[i];
        if (c < 0 || !profiles[i].issue_share)
            continue;
        sums.row(c) += profiles[i].issue_share->transpose();
        counts(c) += 1.0;
    }
    for (Eigen::Index c = 0; c < result.k; ++c)
        if (counts(c) > 0.0)
            sums.row(c) /= counts(c);
    return sums;
}

void write_profiles_csv(std::ostream& out, const std::vector<ConstituencyProfile>& profiles, int k,
                        const MetadataHeader& header) {
    out << header.csv_line() << "\ncode,name,electorate,total_signatures,per_elector";
    for (int i = 0; i < k; ++i)
        out << ",share_" << i;
    for (int i = 0; i < k; ++i)
        out << ",z_" << i;
    out << ",cluster\n";
    for (const auto& p : profiles) {
        out << csv_escape(p.meta.code) << ',' << csv_escape(p.meta.name) << ',' << p.meta.electorate << ','
            << p.total_signatures << ',' << format_real(p.per_elector);
        for (const auto* v : {&p.issue_share, &p.z_scores})
            for (int i = 0; i < k; ++i)
                out << ',' << (*v ? format_real((**v)(i)) : "NA");
        out << ',' << (p.cluster ? std::to_string(*p.cluster) : "NA") << '\n';
    }
}

void write_scaling_json(std::ostream& out, const ScalingFit& fit, const MetadataHeader& header) {
    const nlohmann::json doc = {
        {"meta", {{"tool_version", header.tool_version}, {"config_hash", header.config_hash}, {"seed", header.seed}}},
        {"exponent", fit.exponent},
        {"intercept", fit.intercept},
        {"r_squared", fit.r_squared},
        {"mode", fit.mode == ScalingMode::raw ? "raw" : "binned"},
        {"n", fit.n}};
    out << doc.dump(2) << '\n';
}

void write_clusters_csv(std::ostream& out, const std::vector<ConstituencyProfile>& profiles, const ClusterResult& result,
                        const MetadataHeader& header) {
    out << header.csv_line() << "\ncode,cluster\n";
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        const int c = result.assignments[i];
        out << csv_escape(profiles[i].meta.code) << ',' << (c >= 0 ? std::to_string(c) : "NA") << '\n';
    }
}

void write_cluster_profile_csv(std::ostream& out, const Eigen::MatrixXd& cluster_means,
                               const std::vector<std::string>& names, const MetadataHeader& header) {
    out << header.csv_line() << "\ncluster";
    for (const auto& n : names)
        out << ',' << csv_escape(n);
    out << '\n';
    for (Eigen::Index c = 0; c < cluster_means.rows(); ++c) {
        out << c;
        for (Eigen::Index i = 0; i < cluster_means.cols(); ++i)
            out << ',' << format_real(cluster_means(c, i));
        out << '\n';
    }
}

} // namespace petitions::geo
