#include "faast/nn.hpp"

#include <cmath>

#include "faast/canon.hpp"
#include "faast/errors.hpp"

namespace faast::nn {

std::vector<size_t> Rng::sample_indices(size_t n, size_t k) {
    std::vector<size_t> pool(n);
    for (size_t i = 0; i < n; ++i) pool[i] = i;
    std::vector<size_t> out;
    out.reserve(k);
    for (size_t i = 0; i < k && !pool.empty(); ++i) {
        size_t j = below(pool.size());
        out.push_back(pool[j]);
        pool[j] = pool.back();
        pool.pop_back();
    }
    return out;
}

MatrixXd& ParamStore::add(const std::string& name, int rows, int cols) {
    Param p;
    p.value = MatrixXd::Zero(rows, cols);
    p.grad = MatrixXd::Zero(rows, cols);
    p.adam_m = MatrixXd::Zero(rows, cols);
    p.adam_v = MatrixXd::Zero(rows, cols);
    auto [it, inserted] = params_.emplace(name, std::move(p));
    if (!inserted) raise(ErrorCode::Config, "duplicate parameter '" + name + "'");
    return it->second.value;
}

Param& ParamStore::at(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) raise(ErrorCode::Config, "unknown parameter '" + name + "'");
    return it->second;
}

const Param& ParamStore::at(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) raise(ErrorCode::Config, "unknown parameter '" + name + "'");
    return it->second;
}

std::vector<std::string> ParamStore::names() const {
    std::vector<std::string> out;
    out.reserve(params_.size());
    for (auto& [name, _] : params_) out.push_back(name);
    return out;
}

void ParamStore::zero_grads() {
    for (auto& [_, p] : params_) p.grad.setZero();
}

bool ParamStore::finite() const {
    for (auto& [_, p] : params_)
        if (!p.value.allFinite()) return false;
    return true;
}

void adam_step(ParamStore& store, double lr, double beta1, double beta2, double eps) {
    store.set_step(store.step() + 1);
    double t = static_cast<double>(store.step());
    double bc1 = 1.0 - std::pow(beta1, t);
    double bc2 = 1.0 - std::pow(beta2, t);
    for (auto& [name, p] : store) {
        p.adam_m = beta1 * p.adam_m + (1.0 - beta1) * p.grad;
        p.adam_v = beta2 * p.adam_v + (1.0 - beta2) * p.grad.cwiseProduct(p.grad);
        MatrixXd m_hat = p.adam_m / bc1;
        MatrixXd v_hat = p.adam_v / bc2;
        p.value -= lr * (m_hat.array() / (v_hat.array().sqrt() + eps)).matrix();
        p.grad.setZero();
    }
}

MatrixXd apply_activation(const MatrixXd& x, Activation act) {
    switch (act) {
        case Activation::Identity: return x;
        case Activation::ReLU: return x.cwiseMax(0.0);
        case Activation::Sigmoid: return ((-x.array()).exp() + 1.0).inverse().matrix();
        case Activation::Tanh: return x.array().tanh().matrix();
    }
    return x;
}

namespace {

MatrixXd activation_backward(const MatrixXd& dy, const MatrixXd& y, Activation act) {
    switch (act) {
        case Activation::Identity: return dy;
        case Activation::ReLU:
            return (y.array() > 0.0).select(dy, MatrixXd::Zero(dy.rows(), dy.cols()));
        case Activation::Sigmoid:
            return (dy.array() * y.array() * (1.0 - y.array())).matrix();
        case Activation::Tanh:
            return (dy.array() * (1.0 - y.array().square())).matrix();
    }
    return dy;
}

void check_dims(const MatrixXd& x, const MatrixXd& w, const char* who) {
    if (x.cols() != w.rows())
        raise(ErrorCode::Shape, std::string(who) + ": input width " +
                                    std::to_string(x.cols()) + " != weight rows " +
                                    std::to_string(w.rows()));
}

}  // namespace

MatrixXd dense_forward(const MatrixXd& x, const MatrixXd& w, const RowVectorXd& b,
                       Activation act, DenseCache* cache) {
    check_dims(x, w, "dense");
    MatrixXd y = apply_activation(canon::linear(x, w, b), act);
    if (cache) {
        cache->x = x;
        cache->y = y;
    }
    return y;
}

MatrixXd dense_backward(const MatrixXd& dy, const DenseCache& cache, const MatrixXd& w,
                        MatrixXd& dw, MatrixXd& db, Activation act) {
    MatrixXd dpre = activation_backward(dy, cache.y, act);
    dw.noalias() += cache.x.transpose() * dpre;
    db.noalias() += MatrixXd(dpre.colwise().sum());
    return dpre * w.transpose();
}

void init_uniform(MatrixXd& m, Rng& rng, double scale) {
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform(-scale, scale);
}

void init_glorot(MatrixXd& m, Rng& rng) {
    double scale = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    init_uniform(m, rng, scale);
}

void mlp_init(ParamStore& store, const std::string& prefix, const MlpSpec& spec, Rng& rng) {
    int in = spec.input_dim;
    for (int l = 0; l < spec.layer_count(); ++l) {
        int out = l < static_cast<int>(spec.hidden_dims.size())
                      ? spec.hidden_dims[static_cast<size_t>(l)]
                      : spec.output_dim;
        if (in < 1 || out < 1) raise(ErrorCode::Shape, "mlp dims must be >= 1");
        MatrixXd& w = store.add(prefix + ".w" + std::to_string(l), in, out);
        init_glorot(w, rng);
        store.add(prefix + ".b" + std::to_string(l), 1, out);
        in = out;
    }
}

MatrixXd mlp_forward(const MlpSpec& spec, ParamStore& store, const std::string& prefix,
                     const MatrixXd& x, MlpCache* cache) {
    if (x.cols() != spec.input_dim) raise(ErrorCode::Shape, "mlp input width mismatch");
    if (cache) cache->layers.assign(static_cast<size_t>(spec.layer_count()), {});
    MatrixXd h = x;
    for (int l = 0; l < spec.layer_count(); ++l) {
        Activation act = l + 1 < spec.layer_count() ? spec.hidden_activation
                                                    : spec.output_activation;
        h = dense_forward(h, store.value(prefix + ".w" + std::to_string(l)),
                          store.value(prefix + ".b" + std::to_string(l)).row(0), act,
                          cache ? &cache->layers[static_cast<size_t>(l)] : nullptr);
    }
    return h;
}

MatrixXd mlp_backward(const MlpSpec& spec, ParamStore& store, const std::string& prefix,
                      const MatrixXd& dy, const MlpCache& cache) {
    MatrixXd grad = dy;
    for (int l = spec.layer_count() - 1; l >= 0; --l) {
        Activation act = l + 1 < spec.layer_count() ? spec.hidden_activation
                                                    : spec.output_activation;
        grad = dense_backward(grad, cache.layers[static_cast<size_t>(l)],
                              store.value(prefix + ".w" + std::to_string(l)),
                              store.grad(prefix + ".w" + std::to_string(l)),
                              store.grad(prefix + ".b" + std::to_string(l)), act);
    }
    return grad;
}

void gru_init(ParamStore& store, const std::string& prefix, int input_dim, int state_dim,
              Rng& rng) {
    if (input_dim < 1 || state_dim < 1) raise(ErrorCode::Shape, "gru dims must be >= 1");
    for (const char* gate : {"z", "r", "c"}) {
        MatrixXd& w = store.add(prefix + ".w" + gate, input_dim, state_dim);
        init_glorot(w, rng);
        MatrixXd& u = store.add(prefix + ".u" + gate, state_dim, state_dim);
        init_glorot(u, rng);
        store.add(prefix + ".b" + gate, 1, state_dim);
    }
}

MatrixXd gru_forward(ParamStore& store, const std::string& prefix, const MatrixXd& h,
                     const MatrixXd& m, GruCache* cache) {
    if (h.rows() != m.rows()) raise(ErrorCode::Shape, "gru state/input row mismatch");
    const MatrixXd& wz = store.value(prefix + ".wz");
    const MatrixXd& wr = store.value(prefix + ".wr");
    const MatrixXd& wc = store.value(prefix + ".wc");
    const MatrixXd& uz = store.value(prefix + ".uz");
    const MatrixXd& ur = store.value(prefix + ".ur");
    const MatrixXd& uc = store.value(prefix + ".uc");
    check_dims(m, wz, "gru input");
    check_dims(h, uz, "gru state");

    // Evaluate per distinct (h, m) row pair, then broadcast.
    canon::RowGroups groups = canon::group_rows_pair(h, m);
    int d = static_cast<int>(h.cols());
    MatrixXd hu = groups.unique.leftCols(d);
    MatrixXd mu = groups.unique.rightCols(m.cols());

    MatrixXd zu = apply_activation(
        ((mu * wz + hu * uz).rowwise() + store.value(prefix + ".bz").row(0)),
        Activation::Sigmoid);
    MatrixXd ru = apply_activation(
        ((mu * wr + hu * ur).rowwise() + store.value(prefix + ".br").row(0)),
        Activation::Sigmoid);
    MatrixXd rhu = ru.cwiseProduct(hu);
    MatrixXd cu = apply_activation(
        ((mu * wc + rhu * uc).rowwise() + store.value(prefix + ".bc").row(0)),
        Activation::Tanh);
    MatrixXd newu = (1.0 - zu.array()).matrix().cwiseProduct(hu) + zu.cwiseProduct(cu);

    int n = static_cast<int>(h.rows());
    MatrixXd out(n, d);
    if (cache) {
        cache->h = h;
        cache->m = m;
        cache->z.resize(n, d);
        cache->r.resize(n, d);
        cache->c.resize(n, d);
        cache->rh.resize(n, d);
    }
    for (int i = 0; i < n; ++i) {
        int g = groups.group_of[static_cast<size_t>(i)];
        out.row(i) = newu.row(g);
        if (cache) {
            cache->z.row(i) = zu.row(g);
            cache->r.row(i) = ru.row(g);
            cache->c.row(i) = cu.row(g);
            cache->rh.row(i) = rhu.row(g);
        }
    }
    return out;
}

std::pair<MatrixXd, MatrixXd> gru_backward(ParamStore& store, const std::string& prefix,
                                           const MatrixXd& dnew, const GruCache& cache) {
    const MatrixXd& z = cache.z;
    const MatrixXd& r = cache.r;
    const MatrixXd& c = cache.c;

    MatrixXd dz = dnew.cwiseProduct(c - cache.h);
    MatrixXd dc = dnew.cwiseProduct(z);
    MatrixXd dh = dnew.cwiseProduct((1.0 - z.array()).matrix());

    MatrixXd dc_pre = (dc.array() * (1.0 - c.array().square())).matrix();
    MatrixXd dz_pre = (dz.array() * z.array() * (1.0 - z.array())).matrix();

    const MatrixXd& uc = store.value(prefix + ".uc");
    MatrixXd drh = dc_pre * uc.transpose();
    MatrixXd dr = drh.cwiseProduct(cache.h);
    dh += drh.cwiseProduct(r);
    MatrixXd dr_pre = (dr.array() * r.array() * (1.0 - r.array())).matrix();

    MatrixXd dm = dc_pre * store.value(prefix + ".wc").transpose() +
                  dz_pre * store.value(prefix + ".wz").transpose() +
                  dr_pre * store.value(prefix + ".wr").transpose();
    dh += dz_pre * store.value(prefix + ".uz").transpose() +
          dr_pre * store.value(prefix + ".ur").transpose();

    store.grad(prefix + ".wz").noalias() += cache.m.transpose() * dz_pre;
    store.grad(prefix + ".wr").noalias() += cache.m.transpose() * dr_pre;
    store.grad(prefix + ".wc").noalias() += cache.m.transpose() * dc_pre;
    store.grad(prefix + ".uz").noalias() += cache.h.transpose() * dz_pre;
    store.grad(prefix + ".ur").noalias() += cache.h.transpose() * dr_pre;
    store.grad(prefix + ".uc").noalias() += cache.rh.transpose() * dc_pre;
    store.grad(prefix + ".bz").noalias() += MatrixXd(dz_pre.colwise().sum());
    store.grad(prefix + ".br").noalias() += MatrixXd(dr_pre.colwise().sum());
    store.grad(prefix + ".bc").noalias() += MatrixXd(dc_pre.colwise().sum());
    return {dh, dm};
}

VectorXd softmax(const VectorXd& v) {
    if (v.size() == 0) raise(ErrorCode::Shape, "softmax of empty vector");
    double m = v.maxCoeff();
    VectorXd e = (v.array() - m).exp();
    return e / e.sum();
}

void readout_init(ParamStore& store, const std::string& prefix, int dim, Rng& rng) {
    if (dim < 1) raise(ErrorCode::Shape, "readout dim must be >= 1");
    for (const char* part : {"gate", "inner", "out"}) {
        MatrixXd& w = store.add(prefix + "." + part + "_w", dim, dim);
        init_glorot(w, rng);
        store.add(prefix + "." + part + "_b", 1, dim);
    }
}

VectorXd readout_forward(ParamStore& store, const std::string& prefix, const MatrixXd& h,
                         ReadoutCache* cache) {
    if (h.rows() == 0) raise(ErrorCode::EmptyGraph, "readout over empty graph");
    MatrixXd gate_sig = apply_activation(
        canon::linear(h, store.value(prefix + ".gate_w"), store.value(prefix + ".gate_b").row(0)),
        Activation::Sigmoid);
    MatrixXd inner =
        canon::linear(h, store.value(prefix + ".inner_w"), store.value(prefix + ".inner_b").row(0));
    MatrixXd prod = gate_sig.cwiseProduct(inner);
    RowVectorXd pooled = canon::sum_rows(prod);
    RowVectorXd out =
        pooled * store.value(prefix + ".out_w") + store.value(prefix + ".out_b").row(0);
    if (cache) {
        cache->h = h;
        cache->gate_sig = gate_sig;
        cache->inner = inner;
        cache->prod = prod;
        cache->pooled = pooled;
    }
    return out.transpose();
}

MatrixXd readout_backward(ParamStore& store, const std::string& prefix, const VectorXd& dout,
                          const ReadoutCache& cache) {
    RowVectorXd doutr = dout.transpose();
    store.grad(prefix + ".out_w").noalias() += cache.pooled.transpose() * doutr;
    store.grad(prefix + ".out_b").noalias() += MatrixXd(doutr);
    RowVectorXd dpooled = doutr * store.value(prefix + ".out_w").transpose();

    MatrixXd dprod = dpooled.replicate(cache.h.rows(), 1);
    MatrixXd dgate_sig = dprod.cwiseProduct(cache.inner);
    MatrixXd dinner = dprod.cwiseProduct(cache.gate_sig);
    MatrixXd dgate_pre =
        (dgate_sig.array() * cache.gate_sig.array() * (1.0 - cache.gate_sig.array())).matrix();

    store.grad(prefix + ".gate_w").noalias() += cache.h.transpose() * dgate_pre;
    store.grad(prefix + ".gate_b").noalias() += MatrixXd(dgate_pre.colwise().sum());
    store.grad(prefix + ".inner_w").noalias() += cache.h.transpose() * dinner;
    store.grad(prefix + ".inner_b").noalias() += MatrixXd(dinner.colwise().sum());

    return dgate_pre * store.value(prefix + ".gate_w").transpose() +
           dinner * store.value(prefix + ".inner_w").transpose();
}

MseResult mse_loss(double score, double label) {
    double diff = label - score;
    return {diff * diff, -2.0 * diff};
}

GradCheckReport grad_check(ParamStore& store, const std::function<double()>& loss_fn,
                           const std::function<void()>& backward_fn, double eps,
                           std::uint64_t seed, int max_entries_per_param) {
    store.zero_grads();
    loss_fn();
    backward_fn();
    std::map<std::string, MatrixXd> analytic;
    for (auto& [name, p] : store) analytic[name] = p.grad;

    Rng rng(seed);
    GradCheckReport report;
    for (auto& [name, p] : store) {
        size_t total = static_cast<size_t>(p.value.size());
        std::vector<size_t> entries;
        if (total <= static_cast<size_t>(max_entries_per_param)) {
            for (size_t i = 0; i < total; ++i) entries.push_back(i);
        } else {
            entries = rng.sample_indices(total, static_cast<size_t>(max_entries_per_param));
        }
        for (size_t flat : entries) {
            double* cell = p.value.data() + flat;
            double saved = *cell;
            *cell = saved + eps;
            double up = loss_fn();
            *cell = saved - eps;
            double down = loss_fn();
            *cell = saved;
            double numeric = (up - down) / (2.0 * eps);
            double a = analytic[name].data()[flat];
            double rel = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
            ++report.checked;
            if (rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst_param = name;
            }
        }
    }
    store.zero_grads();
    return report;
}

}  // namespace faast::nn
