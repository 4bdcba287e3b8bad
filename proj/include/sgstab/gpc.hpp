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

#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace sgstab {

// Orthogonal polynomial families used for chaos expansions. Hermite is the
// probabilists' family (standard Gaussian weight); Legendre is taken with
// the uniform density 1/2 on (-1,1) so that quadrature weights sum to one.
enum class PolyFamily { Hermite, Legendre };

enum class IndexSetKind { Total, Sparse };

PolyFamily parse_poly_family(const std::string& name);
IndexSetKind parse_index_set_kind(const std::string& name);
std::string to_string(PolyFamily family);
std::string to_string(IndexSetKind kind);

/// Value of the unnormalized recurrence polynomial of degree k at xi.
template <typename Scalar>
Scalar eval_poly(PolyFamily family, int k, Scalar xi)
{
    if (k == 0) return Scalar(1);
    Scalar prev = Scalar(1);
    Scalar cur = xi;
    for (int n = 1; n < k; ++n) {
        Scalar next;
        if (family == PolyFamily::Hermite) {
            next = xi * cur - Scalar(n) * prev;
        } else {
            next = (Scalar(2 * n + 1) * xi * cur - Scalar(n) * prev) / Scalar(n + 1);
        }
        prev = cur;
        cur = next;
    }
    return cur;
}

// Ordered set of multi-indices k = (k_1,...,k_M). Index zero is always the
// all-zero tuple and the ordering is lexicographic.
struct MultiIndexSet {
    int dims = 0;   // M
    int order = 0;  // K
    IndexSetKind kind = IndexSetKind::Sparse;
    std::vector<std::vector<int>> indices;

    int size() const { return static_cast<int>(indices.size()); }
    /// Position of a multi-index in the set, -1 if absent.
    int find(const std::vector<int>& idx) const;
    /// Position of the first-order index with a one in dimension dim.
    int unit_index(int dim) const;
};

/// Closed-form cardinality of an index set: (K+1)^M for Total and
/// (M+K)!/(M!K!) for Sparse.
std::size_t index_set_cardinality(int dims, int order, IndexSetKind kind);

MultiIndexSet build_index_set(int dims, int order, IndexSetKind kind,
                              std::size_t cardinality_cap = 1000000);

// Gauss rule in probabilist normalization: weights sum to one and
// polynomials up to degree 2*Q-1 integrate exactly against the density.
struct Quadrature {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

Quadrature gauss_quadrature(PolyFamily family, int node_count);

/// Per-dimension node count that keeps triple products of degree <= 3K exact.
int default_quadrature_size(int order);

// Normalized tensor-product basis over a multi-index set. All evaluations
// use polynomials scaled to unit norm, so Gram matrices are identities and
// the mean/variance of an expansion are read off the modes directly.
class GpcBasis {
public:
    GpcBasis(std::vector<PolyFamily> families, MultiIndexSet index_set, int quad_size = 0);
    GpcBasis(PolyFamily family, MultiIndexSet index_set, int quad_size = 0);

    int size() const { return index_set_.size(); }
    int dims() const { return index_set_.dims; }
    int order() const { return index_set_.order; }
    int quadrature_size() const { return quad_size_; }
    const MultiIndexSet& index_set() const { return index_set_; }
    const std::vector<PolyFamily>& families() const { return families_; }
    const Quadrature& quadrature(int dim) const { return quad_[static_cast<std::size_t>(dim)]; }
    double norm(int dim, int degree) const;

    /// Normalized basis polynomial at a point xi in R^M.
    double eval(int index_position, const Eigen::VectorXd& xi) const;

    // Tensorized quadrature over all Q^M node tuples. nodes is M x n_nodes,
    // weights has the product weights, and basis_at_nodes is |K| x n_nodes.
    const Eigen::MatrixXd& tensor_nodes() const;
    const Eigen::VectorXd& tensor_weights() const;
    const Eigen::MatrixXd& basis_at_nodes() const;

    /// Matrices G^k with entries <phi_k, phi_i phi_j>, one per basis index.
    std::vector<Eigen::MatrixXd> triple_product_tensor() const;

    /// Modes of a scalar function of xi, computed by tensorized quadrature.
    Eigen::VectorXd project(const std::function<double(const Eigen::VectorXd&)>& f) const;

    /// Serializable descriptor: a [basis] config block.
    std::string describe() const;

private:
    std::vector<PolyFamily> families_;
    MultiIndexSet index_set_;
    int quad_size_ = 0;
    std::vector<Quadrature> quad_;
    // norms_[dim][k] of the unnormalized degree-k polynomial, by quadrature
    std::vector<std::vector<double>> norms_;
    // tensorized quadrature tables, built once on first use and shared by
    // copies; the indirection keeps the basis movable and the fill race-free
    struct TensorCache {
        std::once_flag once;
        Eigen::MatrixXd nodes;
        Eigen::VectorXd weights;
        Eigen::MatrixXd basis;
    };
    std::shared_ptr<TensorCache> cache_ = std::make_shared<TensorCache>();

    void build_tensor_cache() const;
    void build_tensor_cache_impl() const;
};

}  // namespace sgstab
