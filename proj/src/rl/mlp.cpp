#include "auvctl/rl/mlp.hpp"

#include <istream>
#include <ostream>

namespace auvctl::rl {

namespace {

template <class T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw IoError("truncated network data");
    return v;
}

}  // namespace

void write_matrix(std::ostream& os, const Matrix& m) {
    put<std::int64_t>(os, m.rows());
    put<std::int64_t>(os, m.cols());
    os.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
}

Matrix read_matrix(std::istream& is) {
    const auto r = get<std::int64_t>(is), c = get<std::int64_t>(is);
    if (r < 0 || c < 0 || r * c > (1LL << 32)) throw IoError("bad matrix shape in network data");
    Matrix m(r, c);
    is.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!is) throw IoError("truncated network data");
    return m;
}

Mlp::Mlp(std::vector<int> widths, OutputActivation out, std::mt19937_64& rng)
    : widths_(std::move(widths)), out_(out) {
    if (widths_.size() < 2) throw InvalidParams("an MLP needs at least input and output widths");
    for (int w : widths_)
        if (w < 1) throw InvalidParams("MLP layer widths must be >= 1");
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(widths_[l]));
        std::uniform_real_distribution<double> u(-bound, bound);
        Matrix w(widths_[l + 1], widths_[l]);
        for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = u(rng);
        Vector b(widths_[l + 1]);
        for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = u(rng);
        w_.push_back(std::move(w));
        b_.push_back(std::move(b));
    }
}

Vector Mlp::forward(const Vector& x) const {
    const Matrix out = forward(Matrix(x));
    return out.col(0);
}

Matrix Mlp::forward(const Matrix& x) const {
    if (x.rows() != input_width())
        throw WidthMismatch("network expects input width " + std::to_string(input_width()) + ", got " +
                            std::to_string(x.rows()));
    Matrix h = x;
    for (std::size_t l = 0; l < w_.size(); ++l) {
        Matrix z = w_[l] * h;
        z.colwise() += b_[l];
        if (l + 1 < w_.size()) h = z.cwiseMax(0.0);
        else h = out_ == OutputActivation::Tanh ? Matrix(z.array().tanh()) : z;
    }
    return h;
}

Matrix Mlp::forward(const Matrix& x, Cache& c) const {
    if (x.rows() != input_width())
        throw WidthMismatch("network expects input width " + std::to_string(input_width()) + ", got " +
                            std::to_string(x.rows()));
    c.inputs.resize(w_.size());
    c.pre.resize(w_.size());
    Matrix h = x;
    for (std::size_t l = 0; l < w_.size(); ++l) {
        c.inputs[l] = h;
        c.pre[l] = w_[l] * h;
        c.pre[l].colwise() += b_[l];
        if (l + 1 < w_.size()) h = c.pre[l].cwiseMax(0.0);
        else h = out_ == OutputActivation::Tanh ? Matrix(c.pre[l].array().tanh()) : c.pre[l];
    }
    c.output = h;
    return h;
}

Matrix Mlp::backward(const Cache& c, const Matrix& d_out, MlpGrads& g) const {
    Matrix d = d_out;
    if (out_ == OutputActivation::Tanh) d = d.array() * (1.0 - c.output.array().square());
    for (std::size_t k = w_.size(); k-- > 0;) {
        if (k + 1 < w_.size()) d = d.array() * (c.pre[k].array() > 0.0).cast<double>();
        g.dw[k].noalias() += d * c.inputs[k].transpose();
        g.db[k] += d.rowwise().sum();
        d = w_[k].transpose() * d;
    }
    return d;
}

MlpGrads Mlp::zero_grads() const {
    MlpGrads g;
    for (std::size_t l = 0; l < w_.size(); ++l) {
        g.dw.push_back(Matrix::Zero(w_[l].rows(), w_[l].cols()));
        g.db.push_back(Vector::Zero(b_[l].size()));
    }
    return g;
}

void Mlp::soft_update_into(Mlp& target, double tau) const {
    for (std::size_t l = 0; l < w_.size(); ++l) {
        target.w_[l] = tau * w_[l] + (1.0 - tau) * target.w_[l];
        target.b_[l] = tau * b_[l] + (1.0 - tau) * target.b_[l];
    }
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < w_.size(); ++l) n += static_cast<std::size_t>(w_[l].size() + b_[l].size());
    return n;
}

Vector Mlp::flat_parameters() const {
    Vector p(static_cast<Eigen::Index>(parameter_count()));
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < w_.size(); ++l) {
        p.segment(k, w_[l].size()) = Eigen::Map<const Vector>(w_[l].data(), w_[l].size());
        k += w_[l].size();
        p.segment(k, b_[l].size()) = b_[l];
        k += b_[l].size();
    }
    return p;
}

void Mlp::set_flat_parameters(const Vector& p) {
    if (static_cast<std::size_t>(p.size()) != parameter_count()) throw LengthMismatch("parameter vector size");
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < w_.size(); ++l) {
        Eigen::Map<Vector>(w_[l].data(), w_[l].size()) = p.segment(k, w_[l].size());
        k += w_[l].size();
        b_[l] = p.segment(k, b_[l].size());
        k += b_[l].size();
    }
}

Vector Mlp::flatten(const MlpGrads& g) {
    Eigen::Index n = 0;
    for (std::size_t l = 0; l < g.dw.size(); ++l) n += g.dw[l].size() + g.db[l].size();
    Vector p(n);
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < g.dw.size(); ++l) {
        p.segment(k, g.dw[l].size()) = Eigen::Map<const Vector>(g.dw[l].data(), g.dw[l].size());
        k += g.dw[l].size();
        p.segment(k, g.db[l].size()) = g.db[l];
        k += g.db[l].size();
    }
    return p;
}

bool Mlp::all_finite() const {
    for (std::size_t l = 0; l < w_.size(); ++l)
        if (!w_[l].allFinite() || !b_[l].allFinite()) return false;
    return true;
}

void Mlp::write(std::ostream& os) const {
    put<std::int32_t>(os, static_cast<std::int32_t>(widths_.size()));
    for (int w : widths_) put<std::int32_t>(os, w);
    put<std::int32_t>(os, out_ == OutputActivation::Tanh ? 1 : 0);
    for (std::size_t l = 0; l < w_.size(); ++l) {
        write_matrix(os, w_[l]);
        write_matrix(os, b_[l]);
    }
}

Mlp Mlp::read(std::istream& is) {
    Mlp m;
    const auto n = get<std::int32_t>(is);
    if (n < 2 || n > 64) throw IoError("bad layer count in network data");
    for (int i = 0; i < n; ++i) m.widths_.push_back(get<std::int32_t>(is));
    m.out_ = get<std::int32_t>(is) == 1 ? OutputActivation::Tanh : OutputActivation::Linear;
    for (int l = 0; l + 1 < n; ++l) {
        Matrix w = read_matrix(is);
        Matrix b = read_matrix(is);
        if (w.rows() != m.widths_[l + 1] || w.cols() != m.widths_[l] || b.rows() != m.widths_[l + 1] || b.cols() != 1)
            throw IoError("layer shape does not match the header");
        m.w_.push_back(std::move(w));
        m.b_.push_back(b.col(0));
    }
    return m;
}

Adam::Adam(const Mlp& net, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (int l = 0; l < net.layer_count(); ++l) {
        mw_.push_back(Matrix::Zero(net.weights()[l].rows(), net.weights()[l].cols()));
        vw_.push_back(mw_.back());
        mb_.push_back(Vector::Zero(net.biases()[l].size()));
        vb_.push_back(mb_.back());
    }
}

void Adam::step(Mlp& net, const MlpGrads& g) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    const double step = lr_ * std::sqrt(c2) / c1;
    for (int l = 0; l < net.layer_count(); ++l) {
        mw_[l] = beta1_ * mw_[l] + (1.0 - beta1_) * g.dw[l];
        vw_[l] = beta2_ * vw_[l] + (1.0 - beta2_) * g.dw[l].cwiseAbs2();
        net.weights()[l].array() -= step * mw_[l].array() / (vw_[l].array().sqrt() + eps_ * std::sqrt(c2));
        mb_[l] = beta1_ * mb_[l] + (1.0 - beta1_) * g.db[l];
        vb_[l] = beta2_ * vb_[l] + (1.0 - beta2_) * g.db[l].cwiseAbs2();
        net.biases()[l].array() -= step * mb_[l].array() / (vb_[l].array().sqrt() + eps_ * std::sqrt(c2));
    }
}

void Adam::write(std::ostream& os) const {
    put(os, lr_);
    put(os, beta1_);
    put(os, beta2_);
    put(os, eps_);
    put<std::int64_t>(os, t_);
    put<std::int32_t>(os, static_cast<std::int32_t>(mw_.size()));
    for (std::size_t l = 0; l < mw_.size(); ++l) {
        write_matrix(os, mw_[l]);
        write_matrix(os, vw_[l]);
        write_matrix(os, mb_[l]);
        write_matrix(os, vb_[l]);
    }
}

Adam Adam::read(std::istream& is) {
    Adam a;
    a.lr_ = get<double>(is);
    a.beta1_ = get<double>(is);
    a.beta2_ = get<double>(is);
    a.eps_ = get<double>(is);
    a.t_ = get<std::int64_t>(is);
    const auto n = get<std::int32_t>(is);
    if (n < 0 || n > 64) throw IoError("bad optimizer layer count");
    for (int l = 0; l < n; ++l) {
        a.mw_.push_back(read_matrix(is));
        a.vw_.push_back(read_matrix(is));
        a.mb_.push_back(read_matrix(is).col(0));
        a.vb_.push_back(read_matrix(is).col(0));
    }
    return a;
}

}  // namespace auvctl::rl
