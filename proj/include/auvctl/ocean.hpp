#pragma once

#include "auvctl/core.hpp"

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace auvctl {

struct WaveSpectrumParams {
    double alpha = 0.01;
    double f_p = 0.1;
    double gamma_peak = 3.3;
    double sigma_a = 0.07;
    double sigma_b = 0.09;
    double depth = 60.0;
    double f_min = 0.05;
    double f_max = 0.5;
    int n_freq = 32;
    int n_dir = 16;
    double principal_heading = 0.0;  // rad, mean wave direction
    // Component frequencies are snapped to multiples of 1/repeat_period, making the
    // sea exactly periodic. Zero disables snapping.
    double repeat_period = 2000.0;

    void validate() const;
};

/// JONSWAP spectral density S(f) in m^2 s.
double jonswap_spectrum(double f, const WaveSpectrumParams& p);

/// Wavenumber k solving (2 pi f)^2 = g k tanh(k h).
double solve_dispersion(double f, double h);

inline double directional_spreading(double theta) {
    const double c = std::cos(theta);
    return c * c;
}

inline double component_amplitude(double spectrum, double spreading, double df, double dtheta) {
    return std::sqrt(2.0 * spectrum * spreading * df * dtheta);
}

struct WaveComponent {
    int freq_index = 0;
    int dir_index = 0;
    double frequency = 0.0;  // Hz, after in-bin spreading
    double omega = 0.0;      // rad/s
    double wavenumber = 0.0; // 1/m
    double direction = 0.0;  // rad
    double amplitude = 0.0;  // m
    double phase = 0.0;      // rad
};

/// Frozen directional sea: immutable after construction.
class WaveField {
public:
    WaveField(std::vector<WaveComponent> components, double depth, std::uint64_t seed = 0);

    static WaveField build(const WaveSpectrumParams& p, std::uint64_t seed);
    static WaveField calm(double depth = 60.0) { return WaveField({}, depth); }

    const std::vector<WaveComponent>& components() const { return comps_; }
    double depth() const { return depth_; }
    std::uint64_t seed() const { return seed_; }

    /// Sum of a^2/2 over components: the stationary variance of the elevation.
    double variance() const;
    double amplitude_sum() const;

    double elevation(double x, double y, double t) const;
    /// Horizontal Airy velocity at (x, y, z) with z in [-h, 0], z up.
    Vec2 velocity(double x, double y, double z, double t, double h) const;
    Vec2 velocity(double x, double y, double z, double t) const { return velocity(x, y, z, t, depth_); }

    void write_csv(std::ostream& os) const;

private:
    std::vector<WaveComponent> comps_;
    std::vector<double> cos_dir_, sin_dir_;
    double depth_;
    std::uint64_t seed_;
};

double surface_elevation(const WaveField& w, double x, double y, double t);
Vec2 wave_velocity(const WaveField& w, double x, double y, double z, double t, double h);

/// Bathymetry grid: depth below the surface (m, positive down) on a regular grid.
/// Row index runs along y, column index along x.
class Terrain {
public:
    Terrain(int rows, int cols, double cell, Vec2 origin, std::vector<double> depths);

    static Terrain flat(double depth, int rows = 101, int cols = 101, double cell = 10.0,
                        Vec2 origin = Vec2::Zero());
    /// Smoothed fractal heightmap spanning [min_depth, max_depth].
    static Terrain procedural(std::uint64_t seed, int rows = 121, int cols = 121, double cell = 5.0,
                              double min_depth = 35.0, double max_depth = 60.0);
    /// Text ("AUVTERRAIN 1" header) or binary ("AUVTBIN1" magic) grid file.
    static Terrain load(const std::string& path);
    void save_text(const std::string& path) const;
    void save_binary(const std::string& path) const;

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double cell() const { return cell_; }
    Vec2 origin() const { return origin_; }
    Vec2 extent_min() const { return origin_; }
    Vec2 extent_max() const { return origin_ + Vec2((cols_ - 1) * cell_, (rows_ - 1) * cell_); }
    bool contains(double x, double y) const;
    double node(int row, int col) const { return depths_[static_cast<std::size_t>(row) * cols_ + col]; }
    double max_depth() const;
    double min_depth() const;

    /// Bilinear interpolation; out-of-bounds queries clamp to the edge and set the flag.
    double depth_at(double x, double y, bool* out_of_bounds = nullptr) const;

private:
    int rows_, cols_;
    double cell_;
    Vec2 origin_;
    std::vector<double> depths_;
};

inline double depth_at(const Terrain& t, double x, double y, bool* out_of_bounds = nullptr) {
    return t.depth_at(x, y, out_of_bounds);
}

enum class SeaRegime { Calm, ES, VES };

std::string to_string(SeaRegime r);
SeaRegime sea_regime_from_string(const std::string& s);

struct SeaCondition {
    SeaRegime regime = SeaRegime::Calm;
    Vec3 current = Vec3::Zero();  // ambient current base, NED m/s (vertical ignored)
    double scale = 1.0;

    static SeaCondition calm() { return {}; }
    static SeaCondition es(const Vec3& current = Vec3(0.3, 0.2, 0.0)) {
        return {SeaRegime::ES, current, 1.0};
    }
    static SeaCondition ves(const Vec3& current = Vec3(0.3, 0.2, 0.0)) {
        return {SeaRegime::VES, current, 2.0};
    }
    static SeaCondition for_regime(SeaRegime r, const Vec3& current = Vec3(0.3, 0.2, 0.0));
};

struct CalibrationGrid {
    Vec2 min = Vec2::Zero();
    Vec2 max = Vec2(600.0, 600.0);
    int nx = 8;
    int ny = 8;
    double horizon = 600.0;
    double rate = 20.0;
};

/// Gain on the wave velocity such that the peak of |current + gain * v_wave| over
/// the surface grid and horizon equals `peak_speed`.
double calibrate_wave_gain(const WaveField& field, const Vec3& current, const CalibrationGrid& grid,
                           double peak_speed = 2.0);

/// Wave field plus ambient current with the ES calibration applied.
class SeaState {
public:
    SeaState(std::shared_ptr<const WaveField> field, SeaCondition condition, double wave_gain);
    static SeaState calm(double depth = 60.0);

    const WaveField& field() const { return *field_; }
    std::shared_ptr<const WaveField> field_ptr() const { return field_; }
    const SeaCondition& condition() const { return condition_; }
    double wave_gain() const { return wave_gain_; }

    /// Same wave field and calibration under another regime.
    SeaState with_condition(const SeaCondition& c) const { return {field_, c, wave_gain_}; }

    /// Ambient flow at NED position; vertical component is always 0.
    Vec3 total_flow(const Vec3& pos, double t) const;

private:
    std::shared_ptr<const WaveField> field_;
    SeaCondition condition_;
    double wave_gain_;
};

inline Vec3 total_flow(const SeaState& s, const Vec3& pos, double t) { return s.total_flow(pos, t); }

}  // namespace auvctl
