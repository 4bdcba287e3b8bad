/*
 * Copyright 2026 The sgstab authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "sgstab/gpc.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

namespace sgstab {

PolyFamily parse_poly_family(const std::string& name)
{
    if (name == "hermite") return PolyFamily::Hermite;
    if (name == "legendre") return PolyFamily::Legendre;
    throw std::invalid_argument("unknown polynomial family '" + name + "' (expected hermite or legendre)");
}

IndexSetKind parse_index_set_kind(const std::string& name)
{
    if (name == "total") return IndexSetKind::Total;
    if (name == "sparse") return IndexSetKind::Sparse;
    throw std::invalid_argument("unknown index set kind '" + name + "' (expected total or sparse)");
}

std::string to_string(PolyFamily family)
{
    return family == PolyFamily::Hermite ? "hermite" : "legendre";
}

std::string to_string(IndexSetKind kind)
{
    return kind == IndexSetKind::Total ? "total" : "sparse";
}

int MultiIndexSet::find(const std::vector<int>& idx) const
{
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] == idx) return static_cast<int>(i);
    }
    return -1;
}

int MultiIndexSet::unit_index(int dim) const
{
    std::vector<int> idx(static_cast<std::size_t>(dims), 0);
    idx[static_cast<std::size_t>(dim)] = 1;
    int pos = find(idx);
    if (pos < 0) throw std::logic_error("index set does not contain the first-order indices (order < 1?)");
    return pos;
}

std::size_t index_set_cardinality(int dims, int order, IndexSetKind kind)
{
    if (kind == IndexSetKind::Total) {
        std::size_t n = 1;
        for (int d = 0; d < dims; ++d) {
            n *= static_cast<std::size_t>(order) + 1;
        }
        return n;
    }
    // binomial (M+K over K), exact in integer arithmetic
    std::size_t n = 1;
    for (int i = 1; i <= order; ++i) {
        n = n * static_cast<std::size_t>(dims + i) / static_cast<std::size_t>(i);
    }
    return n;
}

MultiIndexSet build_index_set(int dims, int order, IndexSetKind kind, std::size_t cardinality_cap)
{
    if (dims < 1) throw std::invalid_argument("index set needs at least one random dimension");
    if (order < 0) throw std::invalid_argument("index set order must be non-negative");

    const std::size_t card = index_set_cardinality(dims, order, kind);
    if (card > cardinality_cap) {
        throw std::invalid_argument("index set cardinality " + std::to_string(card) +
                                    " exceeds cap " + std::to_string(cardinality_cap));
    }

    MultiIndexSet set;
    set.dims = dims;
    set.order = order;
    set.kind = kind;
    set.indices.reserve(card);

    std::vector<int> idx(static_cast<std::size_t>(dims), 0);
    int sum = 0;
    // odometer over admissible tuples, which enumerates lexicographically
    while (true) {
        set.indices.push_back(idx);
        int d = dims - 1;
        while (d >= 0) {
            const bool can_inc = kind == IndexSetKind::Total
                                     ? idx[static_cast<std::size_t>(d)] < order
                                     : sum < order;
            if (can_inc) {
                ++idx[static_cast<std::size_t>(d)];
                ++sum;
                break;
            }
            sum -= idx[static_cast<std::size_t>(d)];
            idx[static_cast<std::size_t>(d)] = 0;
            --d;
        }
        if (d < 0) break;
    }
    if (set.indices.size() != card) {
        throw std::logic_error("index set enumeration does not match the closed-form cardinality");
    }
    return set;
}

int default_quadrature_size(int order)
{
    return static_cast<int>(std::ceil(1.5 * (order + 1)));
}

Quadrature gauss_quadrature(PolyFamily family, int node_count)
{
    if (node_count < 1) throw std::invalid_argument("quadrature needs at least one node");

    // Golub-Welsch on the Jacobi matrix of the monic three-term recurrence.
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(node_count, node_count);
    for (int k = 1; k < node_count; ++k) {
        double beta;  // recurrence coefficient b_k of x p_k = p_{k+1} + b_k p_{k-1}
        if (family == PolyFamily::Hermite) {
            beta = static_cast<double>(k);
        } else {
            beta = static_cast<double>(k) * k / (4.0 * k * k - 1.0);
        }
        jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(beta);
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("quadrature: eigen decomposition of the Jacobi matrix failed");
    }

    Quadrature q;
    q.nodes = es.eigenvalues();
    q.weights = es.eigenvectors().row(0).array().square();
    return q;
}

GpcBasis::GpcBasis(std::vector<PolyFamily> families, MultiIndexSet index_set, int quad_size)
    : families_(std::move(families)), index_set_(std::move(index_set)), quad_size_(quad_size)
{
    if (static_cast<int>(families_.size()) != index_set_.dims) {
        throw std::invalid_argument("basis needs one polynomial family per random dimension");
    }
    if (quad_size_ <= 0) quad_size_ = default_quadrature_size(index_set_.order);
    if (quad_size_ < default_quadrature_size(index_set_.order)) {
        throw std::invalid_argument("quadrature size " + std::to_string(quad_size_) +
                                    " too small for exact triple products; need at least " +
                                    std::to_string(default_quadrature_size(index_set_.order)));
    }

    quad_.reserve(families_.size());
    norms_.resize(families_.size());
    for (std::size_t d = 0; d < families_.size(); ++d) {
        quad_.push_back(gauss_quadrature(families_[d], quad_size_));
        auto& nd = norms_[d];
        nd.assign(static_cast<std::size_t>(index_set_.order) + 1, 0.0);
        for (int k = 0; k <= index_set_.order; ++k) {
            double s = 0.0;
            for (int qn = 0; qn < quad_size_; ++qn) {
                const double v = eval_poly(families_[d], k, quad_[d].nodes[qn]);
                s += v * v * quad_[d].weights[qn];
            }
            nd[static_cast<std::size_t>(k)] = std::sqrt(s);
        }
    }
}

GpcBasis::GpcBasis(PolyFamily family, MultiIndexSet index_set, int quad_size)
    : GpcBasis(std::vector<PolyFamily>(static_cast<std::size_t>(index_set.dims), family),
               std::move(index_set), quad_size)
{
}

double GpcBasis::norm(int dim, int degree) const
{
    return norms_[static_cast<std::size_t>(dim)][static_cast<std::size_t>(degree)];
}

double GpcBasis::eval(int index_position, const Eigen::VectorXd& xi) const
{
    if (xi.size() != index_set_.dims) {
        throw std::invalid_argument("basis evaluation point has wrong dimension");
    }
    const auto& idx = index_set_.indices[static_cast<std::size_t>(index_position)];
    double v = 1.0;
    for (int d = 0; d < index_set_.dims; ++d) {
        const int k = idx[static_cast<std::size_t>(d)];
        v *= eval_poly(families_[static_cast<std::size_t>(d)], k, xi[d]) / norm(d, k);
    }
    return v;
}

void GpcBasis::build_tensor_cache() const
{
    std::call_once(cache_->once, [this] { build_tensor_cache_impl(); });
}

void GpcBasis::build_tensor_cache_impl() const
{
    Eigen::MatrixXd& tensor_nodes_ = cache_->nodes;
    Eigen::VectorXd& tensor_weights_ = cache_->weights;
    Eigen::MatrixXd& basis_at_nodes_ = cache_->basis;
    const int m = index_set_.dims;
    std::size_t n_nodes = 1;
    for (int d = 0; d < m; ++d) n_nodes *= static_cast<std::size_t>(quad_size_);

    tensor_nodes_.resize(m, static_cast<Eigen::Index>(n_nodes));
    tensor_weights_.resize(static_cast<Eigen::Index>(n_nodes));

    std::vector<int> digit(static_cast<std::size_t>(m), 0);
    for (std::size_t n = 0; n < n_nodes; ++n) {
        double w = 1.0;
        for (int d = 0; d < m; ++d) {
            const int qd = digit[static_cast<std::size_t>(d)];
            tensor_nodes_(d, static_cast<Eigen::Index>(n)) = quad_[static_cast<std::size_t>(d)].nodes[qd];
            w *= quad_[static_cast<std::size_t>(d)].weights[qd];
        }
        tensor_weights_[static_cast<Eigen::Index>(n)] = w;
        for (int d = m - 1; d >= 0; --d) {
            if (++digit[static_cast<std::size_t>(d)] < quad_size_) break;
            digit[static_cast<std::size_t>(d)] = 0;
        }
    }

    basis_at_nodes_.resize(size(), static_cast<Eigen::Index>(n_nodes));
    // per-dimension tables of normalized 1D values to avoid re-evaluating
    std::vector<Eigen::MatrixXd> table(static_cast<std::size_t>(m));
    for (int d = 0; d < m; ++d) {
        Eigen::MatrixXd& t = table[static_cast<std::size_t>(d)];
        t.resize(index_set_.order + 1, quad_size_);
        for (int k = 0; k <= index_set_.order; ++k) {
            for (int qn = 0; qn < quad_size_; ++qn) {
                t(k, qn) = eval_poly(families_[static_cast<std::size_t>(d)], k,
                                     quad_[static_cast<std::size_t>(d)].nodes[qn]) /
                           norm(d, k);
            }
        }
    }
    std::fill(digit.begin(), digit.end(), 0);
    for (std::size_t n = 0; n < n_nodes; ++n) {
        for (int i = 0; i < size(); ++i) {
            const auto& idx = index_set_.indices[static_cast<std::size_t>(i)];
            double v = 1.0;
            for (int d = 0; d < m; ++d) {
                v *= table[static_cast<std::size_t>(d)](idx[static_cast<std::size_t>(d)],
                                                        digit[static_cast<std::size_t>(d)]);
            }
            basis_at_nodes_(i, static_cast<Eigen::Index>(n)) = v;
        }
        for (int d = m - 1; d >= 0; --d) {
            if (++digit[static_cast<std::size_t>(d)] < quad_size_) break;
            digit[static_cast<std::size_t>(d)] = 0;
        }
    }
}

const Eigen::MatrixXd& GpcBasis::tensor_nodes() const
{
    build_tensor_cache();
    return cache_->nodes;
}

const Eigen::VectorXd& GpcBasis::tensor_weights() const
{
    build_tensor_cache();
    return cache_->weights;
}

const Eigen::MatrixXd& GpcBasis::basis_at_nodes() const
{
    build_tensor_cache();
    return cache_->basis;
}

std::vector<Eigen::MatrixXd> GpcBasis::triple_product_tensor() const
{
    const int m = index_set_.dims;
    const int n = size();

    // 1D tables t_d(a,b,c) = <phi_a phi_b phi_c> for normalized polynomials;
    // the multi-dimensional entry is the product over dimensions.
    std::vector<std::vector<double>> t1(static_cast<std::size_t>(m));
    const int deg = index_set_.order + 1;
    for (int d = 0; d < m; ++d) {
        auto& t = t1[static_cast<std::size_t>(d)];
        t.assign(static_cast<std::size_t>(deg) * deg * deg, 0.0);
        Eigen::MatrixXd vals(deg, quad_size_);
        for (int k = 0; k < deg; ++k) {
            for (int qn = 0; qn < quad_size_; ++qn) {
                vals(k, qn) = eval_poly(families_[static_cast<std::size_t>(d)], k,
                                        quad_[static_cast<std::size_t>(d)].nodes[qn]) /
                              norm(d, k);
            }
        }
        for (int a = 0; a < deg; ++a) {
            for (int b = a; b < deg; ++b) {
                for (int c = b; c < deg; ++c) {
                    double s = 0.0;
                    for (int qn = 0; qn < quad_size_; ++qn) {
                        s += vals(a, qn) * vals(b, qn) * vals(c, qn) *
                             quad_[static_cast<std::size_t>(d)].weights[qn];
                    }
                    const std::size_t ia = static_cast<std::size_t>(a);
                    const std::size_t ib = static_cast<std::size_t>(b);
                    const std::size_t ic = static_cast<std::size_t>(c);
                    const std::size_t dd = static_cast<std::size_t>(deg);
                    // all permutations share the value
                    t[(ia * dd + ib) * dd + ic] = s;
                    t[(ia * dd + ic) * dd + ib] = s;
                    t[(ib * dd + ia) * dd + ic] = s;
                    t[(ib * dd + ic) * dd + ia] = s;
                    t[(ic * dd + ia) * dd + ib] = s;
                    t[(ic * dd + ib) * dd + ia] = s;
                }
            }
        }
    }

    std::vector<Eigen::MatrixXd> tensor;
    tensor.reserve(static_cast<std::size_t>(n));
    const std::size_t dd = static_cast<std::size_t>(deg);
    for (int k = 0; k < n; ++k) {
        Eigen::MatrixXd g(n, n);
        const auto& ik = index_set_.indices[static_cast<std::size_t>(k)];
        for (int i = 0; i < n; ++i) {
            const auto& ii = index_set_.indices[static_cast<std::size_t>(i)];
            for (int j = i; j < n; ++j) {
                const auto& ij = index_set_.indices[static_cast<std::size_t>(j)];
                double v = 1.0;
                for (int d = 0; d < m; ++d) {
                    const std::size_t a = static_cast<std::size_t>(ik[static_cast<std::size_t>(d)]);
                    const std::size_t b = static_cast<std::size_t>(ii[static_cast<std::size_t>(d)]);
                    const std::size_t c = static_cast<std::size_t>(ij[static_cast<std::size_t>(d)]);
                    v *= t1[static_cast<std::size_t>(d)][(a * dd + b) * dd + c];
                    if (v == 0.0) break;
                }
                g(i, j) = v;
                g(j, i) = v;
            }
        }
        tensor.push_back(std::move(g));
    }
    return tensor;
}

Eigen::VectorXd GpcBasis::project(const std::function<double(const Eigen::VectorXd&)>& f) const
{
    build_tensor_cache();
    const Eigen::Index n_nodes = cache_->weights.size();
    Eigen::VectorXd fw(n_nodes);
    for (Eigen::Index n = 0; n < n_nodes; ++n) {
        const double v = f(cache_->nodes.col(n));
        if (!std::isfinite(v)) {
            std::ostringstream os;
            os << "projection: non-finite function value at quadrature node ("
               << cache_->nodes.col(n).transpose() << ")";
            throw std::runtime_error(os.str());
        }
        fw[n] = v * cache_->weights[n];
    }
    return cache_->basis * fw;
}

std::string GpcBasis::describe() const
{
    std::ostringstream os;
    os << "[basis]\n";
    bool uniform = true;
    for (const auto& f : families_) uniform = uniform && f == families_.front();
    if (uniform) {
        os << "family = " << to_string(families_.front()) << "\n";
    } else {
        os << "family = ";
        for (std::size_t d = 0; d < families_.size(); ++d) {
            os << (d ? ", " : "") << to_string(families_[d]);
        }
        os << "\n";
    }
    os << "M = " << index_set_.dims << "\n";
    os << "K = " << index_set_.order << "\n";
    os << "set = " << to_string(index_set_.kind) << "\n";
    os << "Q = " << quad_size_ << "\n";
    return os.str();
}

}  // namespace sgstab
