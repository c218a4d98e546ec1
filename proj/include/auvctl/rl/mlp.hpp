#pragma once

#include "auvctl/core.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <random>
#include <vector>

namespace auvctl::rl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class OutputActivation { Linear, Tanh };

struct MlpGrads {
    std::vector<Matrix> dw;
    std::vector<Vector> db;
};

/// Fully connected network with ReLU hidden layers. Batches are column-major:
/// one sample per column.
class Mlp {
public:
    struct Cache {
        std::vector<Matrix> inputs;  // input to each layer
        std::vector<Matrix> pre;     // pre-activation of each layer
        Matrix output;
    };

    Mlp() = default;
    Mlp(std::vector<int> widths, OutputActivation out, std::mt19937_64& rng);

    int input_width() const { return widths_.front(); }
    int output_width() const { return widths_.back(); }
    const std::vector<int>& widths() const { return widths_; }
    OutputActivation output_activation() const { return out_; }
    int layer_count() const { return static_cast<int>(w_.size()); }

    Vector forward(const Vector& x) const;
    Matrix forward(const Matrix& x) const;
    Matrix forward(const Matrix& x, Cache& cache) const;
    /// Accumulates parameter gradients of sum(d_out .* output) and returns the
    /// gradient with respect to the input.
    Matrix backward(const Cache& cache, const Matrix& d_out, MlpGrads& grads) const;
    MlpGrads zero_grads() const;

    /// target <- tau * this + (1 - tau) * target.
    void soft_update_into(Mlp& target, double tau) const;

    std::size_t parameter_count() const;
    Vector flat_parameters() const;
    void set_flat_parameters(const Vector& p);
    static Vector flatten(const MlpGrads& g);
    bool all_finite() const;

    std::vector<Matrix>& weights() { return w_; }
    std::vector<Vector>& biases() { return b_; }
    const std::vector<Matrix>& weights() const { return w_; }
    const std::vector<Vector>& biases() const { return b_; }

    void write(std::ostream& os) const;
    static Mlp read(std::istream& is);

private:
    std::vector<int> widths_;
    OutputActivation out_ = OutputActivation::Linear;
    std::vector<Matrix> w_;
    std::vector<Vector> b_;
};

class Adam {
public:
    Adam() = default;
    Adam(const Mlp& net, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
    void step(Mlp& net, const MlpGrads& g);
    double learning_rate() const { return lr_; }
    long steps() const { return t_; }

    void write(std::ostream& os) const;
    static Adam read(std::istream& is);

private:
    double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
    long t_ = 0;
    std::vector<Matrix> mw_, vw_;
    std::vector<Vector> mb_, vb_;
};

/// Raw little-endian binary helpers shared by the rl serializers.
void write_matrix(std::ostream& os, const Matrix& m);
Matrix read_matrix(std::istream& is);

}  // namespace auvctl::rl
