#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace faast::nn {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

/// Seeded RNG with bit-stable primitives (does not rely on the library
/// distribution implementations, so the same seed gives the same stream on
/// any standard library).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return engine_() % n; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

    /// Sample k distinct indices from [0, n) (k <= n), in draw order.
    std::vector<size_t> sample_indices(size_t n, size_t k);

private:
    std::mt19937_64 engine_;
};

struct Param {
    MatrixXd value;
    MatrixXd grad;
    MatrixXd adam_m;
    MatrixXd adam_v;
};

/// Named parameter matrices with matching gradient slots and Adam state.
/// Iteration order is the lexicographic name order (std::map), which keeps
/// checkpoints and updates deterministic.
class ParamStore {
public:
    MatrixXd& add(const std::string& name, int rows, int cols);
    bool has(const std::string& name) const { return params_.count(name) > 0; }
    Param& at(const std::string& name);
    const Param& at(const std::string& name) const;
    MatrixXd& value(const std::string& name) { return at(name).value; }
    const MatrixXd& value(const std::string& name) const { return at(name).value; }
    MatrixXd& grad(const std::string& name) { return at(name).grad; }

    std::vector<std::string> names() const;
    void zero_grads();
    long step() const { return step_; }
    void set_step(long s) { step_ = s; }

    /// True if every parameter value is finite.
    bool finite() const;

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

private:
    std::map<std::string, Param> params_;
    long step_ = 0;
};

/// One Adam update over every parameter in the store, then zero gradients.
void adam_step(ParamStore& store, double lr, double beta1 = 0.9, double beta2 = 0.999,
               double eps = 1e-8);

enum class Activation { Identity, ReLU, Sigmoid, Tanh };

MatrixXd apply_activation(const MatrixXd& x, Activation act);

struct DenseCache {
    MatrixXd x;  // layer input
    MatrixXd y;  // layer output (post-activation)
};

/// y = act(x*W + b). Content-canonical: distinct input rows are evaluated
/// once, so equal rows map to bitwise-equal outputs.
MatrixXd dense_forward(const MatrixXd& x, const MatrixXd& w, const RowVectorXd& b,
                       Activation act, DenseCache* cache);

/// Backward for dense_forward; returns dx, accumulates dw/db.
MatrixXd dense_backward(const MatrixXd& dy, const DenseCache& cache, const MatrixXd& w,
                        MatrixXd& dw, MatrixXd& db, Activation act);

/// Multi-layer perceptron over ParamStore entries `<prefix>.w<i>`/`.b<i>`.
struct MlpSpec {
    int input_dim = 0;
    std::vector<int> hidden_dims;  // may be empty (single affine layer)
    int output_dim = 0;
    Activation hidden_activation = Activation::ReLU;
    Activation output_activation = Activation::Identity;

    int layer_count() const { return static_cast<int>(hidden_dims.size()) + 1; }
};

void mlp_init(ParamStore& store, const std::string& prefix, const MlpSpec& spec, Rng& rng);

struct MlpCache {
    std::vector<DenseCache> layers;
};

MatrixXd mlp_forward(const MlpSpec& spec, ParamStore& store, const std::string& prefix,
                     const MatrixXd& x, MlpCache* cache);

MatrixXd mlp_backward(const MlpSpec& spec, ParamStore& store, const std::string& prefix,
                      const MatrixXd& dy, const MlpCache& cache);

/// GRU cell parameters `<prefix>.{wz,uz,bz,wr,ur,br,wc,uc,bc}`.
/// Update gate z, reset gate r, candidate c; output (1-z) (.) h + z (.) c.
void gru_init(ParamStore& store, const std::string& prefix, int input_dim, int state_dim,
              Rng& rng);

struct GruCache {
    MatrixXd h, m, z, r, c, rh;
};

/// Row-batched GRU step: state h (n x d), input m (n x din) -> new state.
/// Content-canonical over (h, m) row pairs.
MatrixXd gru_forward(ParamStore& store, const std::string& prefix, const MatrixXd& h,
                     const MatrixXd& m, GruCache* cache);

/// Returns (dh, dm); accumulates weight gradients.
std::pair<MatrixXd, MatrixXd> gru_backward(ParamStore& store, const std::string& prefix,
                                           const MatrixXd& dnew, const GruCache& cache);

/// Numerically stable softmax (max subtraction); entries positive, sum 1.
VectorXd softmax(const VectorXd& v);

/// Gated graph readout over `<prefix>.{gate_w,gate_b,inner_w,inner_b,out_w,out_b}`:
/// out = (sum_i sigmoid(gate(h_i)) (.) inner(h_i)) * W_out + b_out.
/// The node sum is order-canonical, so the result is exactly permutation
/// invariant. Throws Error{EmptyGraph} on zero rows.
void readout_init(ParamStore& store, const std::string& prefix, int dim, Rng& rng);

struct ReadoutCache {
    MatrixXd h, gate_sig, inner, prod;
    RowVectorXd pooled;
};

VectorXd readout_forward(ParamStore& store, const std::string& prefix, const MatrixXd& h,
                         ReadoutCache* cache);

MatrixXd readout_backward(ParamStore& store, const std::string& prefix, const VectorXd& dout,
                          const ReadoutCache& cache);

/// (y - s)^2 with gradient d/ds = 2(s - y).
struct MseResult {
    double loss;
    double dscore;
};
MseResult mse_loss(double score, double label);

/// Compare analytic gradients against central finite differences on a
/// random sample of entries per parameter. `loss_fn` must run a full
/// forward pass and return the loss; it is also invoked once after
/// `store.zero_grads()` + `backward_fn` to populate analytic gradients.
struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_param;
    int checked = 0;
};

GradCheckReport grad_check(ParamStore& store, const std::function<double()>& loss_fn,
                           const std::function<void()>& backward_fn, double eps,
                           std::uint64_t seed, int max_entries_per_param = 24);

/// Uniform init in [-scale, scale].
void init_uniform(MatrixXd& m, Rng& rng, double scale);

/// Glorot-style uniform init.
void init_glorot(MatrixXd& m, Rng& rng);

}  // namespace faast::nn
