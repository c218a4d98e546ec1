#include "auvctl/ocean.hpp"

#include <algorithm>
#include <complex>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

namespace auvctl {

void WaveSpectrumParams::validate() const {
    if (!(alpha > 0.0)) throw InvalidParams("spectrum alpha must be > 0");
    if (!(f_min > 0.0 && f_min < f_p && f_p < f_max))
        throw InvalidParams("spectrum requires 0 < f_min < f_p < f_max");
    if (!(gamma_peak >= 1.0)) throw InvalidParams("gamma_peak must be >= 1");
    if (!(sigma_a > 0.0 && sigma_b > 0.0)) throw InvalidParams("sigma_a, sigma_b must be > 0");
    if (!(depth > 0.0)) throw InvalidParams("water depth must be > 0");
    if (n_freq < 2 || n_dir < 1) throw InvalidParams("need n_freq >= 2 and n_dir >= 1");
    if (repeat_period < 0.0) throw InvalidParams("repeat_period must be >= 0");
}

double jonswap_spectrum(double f, const WaveSpectrumParams& p) {
    if (!(f > 0.0)) throw DomainError("spectrum frequency must be > 0");
    const double g = kGravity;
    const double sigma = f <= p.f_p ? p.sigma_a : p.sigma_b;
    const double base = p.alpha * g * g / (std::pow(2.0 * kPi, 4) * std::pow(f, 5)) *
                        std::exp(-1.25 * std::pow(p.f_p / f, 4));
    const double r = std::exp(-(f - p.f_p) * (f - p.f_p) / (2.0 * sigma * sigma * p.f_p * p.f_p));
    return base * std::pow(p.gamma_peak, r);
}

double solve_dispersion(double f, double h) {
    if (!(f > 0.0) || !(h > 0.0)) throw DomainError("dispersion needs f > 0 and h > 0");
    const double g = kGravity;
    const double w2 = std::pow(2.0 * kPi * f, 2);
    auto residual = [&](double k) { return g * k * std::tanh(k * h) - w2; };

    // Both the deep- and shallow-water roots bound k from below.
    double lo = std::max(w2 / g, std::sqrt(w2 / (g * h)));
    double hi = w2 / (g * std::tanh(lo * h));
    if (residual(lo) > 0.0) lo = 0.0;
    double k = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double r = residual(k);
        if (std::abs(r) <= 1e-14 * w2) return k;
        if (r > 0.0) hi = k;
        else lo = k;
        const double th = std::tanh(k * h);
        const double dr = g * th + g * k * h * (1.0 - th * th);
        double next = k - r / dr;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        k = next;
    }
    if (std::abs(residual(k)) < 1e-9 * w2) return k;
    throw ConvergenceError("dispersion solver did not converge for f=" + std::to_string(f) +
                           " h=" + std::to_string(h));
}

WaveField::WaveField(std::vector<WaveComponent> components, double depth, std::uint64_t seed)
    : comps_(std::move(components)), depth_(depth), seed_(seed) {
    if (!(depth_ > 0.0)) throw InvalidParams("wave field depth must be > 0");
    cos_dir_.reserve(comps_.size());
    sin_dir_.reserve(comps_.size());
    for (const auto& c : comps_) {
        if (c.amplitude < 0.0 || !(c.wavenumber > 0.0))
            throw InvalidParams("wave components need a >= 0 and k > 0");
        cos_dir_.push_back(std::cos(c.direction));
        sin_dir_.push_back(std::sin(c.direction));
    }
}

WaveField WaveField::build(const WaveSpectrumParams& p, std::uint64_t seed) {
    p.validate();
    const double df = (p.f_max - p.f_min) / (p.n_freq - 1);
    const double dtheta = p.n_dir > 1 ? kPi / (p.n_dir - 1) : kPi;

    // Each direction bin gets its own frequency inside the frequency bin so that no
    // two components are coherent at a fixed point.
    std::vector<double> freqs;
    freqs.reserve(static_cast<std::size_t>(p.n_freq) * p.n_dir);
    for (int i = 0; i < p.n_freq; ++i) {
        const double fi = p.f_min + i * df;
        for (int j = 0; j < p.n_dir; ++j) {
            const double offset = p.n_dir > 1 ? ((j + 0.5) / p.n_dir - 0.5) * df : 0.0;
            freqs.push_back(fi + offset);
        }
    }
    if (p.repeat_period > 0.0) {
        std::vector<double> snapped(freqs.size());
        std::set<long long> seen;
        bool distinct = true;
        for (std::size_t m = 0; m < freqs.size(); ++m) {
            const long long q = std::llround(freqs[m] * p.repeat_period);
            distinct = distinct && q > 0 && seen.insert(q).second;
            snapped[m] = static_cast<double>(q) / p.repeat_period;
        }
        if (distinct) freqs = std::move(snapped);
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uphase(0.0, 2.0 * kPi);
    std::vector<WaveComponent> comps;
    comps.reserve(freqs.size());
    for (int i = 0; i < p.n_freq; ++i) {
        const double fi = p.f_min + i * df;
        const double s = jonswap_spectrum(fi, p);
        for (int j = 0; j < p.n_dir; ++j) {
            const double rel = p.n_dir > 1 ? -kPi / 2.0 + j * dtheta : 0.0;
            WaveComponent c;
            c.freq_index = i;
            c.dir_index = j;
            c.frequency = freqs[static_cast<std::size_t>(i) * p.n_dir + j];
            c.omega = 2.0 * kPi * c.frequency;
            c.wavenumber = solve_dispersion(c.frequency, p.depth);
            c.direction = p.principal_heading + rel;
            // cos^2 is exactly zero only in exact arithmetic; pin the edge bins.
            const double spread = std::abs(std::abs(rel) - kPi / 2.0) < 1e-12 ? 0.0
                                                                             : directional_spreading(rel);
            c.amplitude = component_amplitude(s, spread, df, dtheta);
            c.phase = uphase(rng);
            comps.push_back(c);
        }
    }
    return WaveField(std::move(comps), p.depth, seed);
}

double WaveField::variance() const {
    double v = 0.0;
    for (const auto& c : comps_) v += 0.5 * c.amplitude * c.amplitude;
    return v;
}

double WaveField::amplitude_sum() const {
    double v = 0.0;
    for (const auto& c : comps_) v += c.amplitude;
    return v;
}

double WaveField::elevation(double x, double y, double t) const {
    double eta = 0.0;
    for (std::size_t m = 0; m < comps_.size(); ++m) {
        const auto& c = comps_[m];
        eta += c.amplitude *
               std::cos(c.wavenumber * (x * cos_dir_[m] + y * sin_dir_[m]) - c.omega * t + c.phase);
    }
    return eta;
}

namespace {

// cosh(k (z + h)) / sinh(k h) evaluated without overflow.
double depth_attenuation(double k, double z, double h) {
    return (std::exp(k * z) + std::exp(-k * (z + 2.0 * h))) / (1.0 - std::exp(-2.0 * k * h));
}

}  // namespace

Vec2 WaveField::velocity(double x, double y, double z, double t, double h) const {
    if (!(h > 0.0)) throw DomainError("water depth must be > 0");
    if (z > 0.0 || z < -h) throw DomainError("z outside water column: " + std::to_string(z));
    Vec2 v = Vec2::Zero();
    for (std::size_t m = 0; m < comps_.size(); ++m) {
        const auto& c = comps_[m];
        if (c.amplitude == 0.0) continue;
        const double ph = c.wavenumber * (x * cos_dir_[m] + y * sin_dir_[m]) - c.omega * t + c.phase;
        const double s = c.amplitude * c.omega * depth_attenuation(c.wavenumber, z, h) * std::cos(ph);
        v.x() += s * cos_dir_[m];
        v.y() += s * sin_dir_[m];
    }
    return v;
}

void WaveField::write_csv(std::ostream& os) const {
    os << "freq_index,dir_index,frequency_hz,direction_rad,amplitude_m,wavenumber_per_m,phase_rad\n";
    os << std::setprecision(17);
    for (const auto& c : comps_)
        os << c.freq_index << ',' << c.dir_index << ',' << c.frequency << ',' << c.direction << ','
           << c.amplitude << ',' << c.wavenumber << ',' << c.phase << '\n';
}

double surface_elevation(const WaveField& w, double x, double y, double t) {
    return w.elevation(x, y, t);
}

Vec2 wave_velocity(const WaveField& w, double x, double y, double z, double t, double h) {
    return w.velocity(x, y, z, t, h);
}

// ---------------------------------------------------------------------------
// Terrain

Terrain::Terrain(int rows, int cols, double cell, Vec2 origin, std::vector<double> depths)
    : rows_(rows), cols_(cols), cell_(cell), origin_(origin), depths_(std::move(depths)) {
    if (rows_ < 2 || cols_ < 2) throw InvalidParams("terrain needs at least 2x2 nodes");
    if (!(cell_ > 0.0)) throw InvalidParams("terrain cell size must be > 0");
    if (depths_.size() != static_cast<std::size_t>(rows_) * cols_)
        throw InvalidParams("terrain depth count does not match rows*cols");
    for (double d : depths_)
        if (!(d > 0.0) || !std::isfinite(d)) throw InvalidParams("terrain depths must be finite and > 0");
}

Terrain Terrain::flat(double depth, int rows, int cols, double cell, Vec2 origin) {
    return Terrain(rows, cols, cell, origin,
                   std::vector<double>(static_cast<std::size_t>(rows) * cols, depth));
}

Terrain Terrain::procedural(std::uint64_t seed, int rows, int cols, double cell, double min_depth,
                            double max_depth) {
    if (!(min_depth > 0.0 && max_depth > min_depth))
        throw InvalidParams("procedural terrain needs 0 < min_depth < max_depth");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> h(static_cast<std::size_t>(rows) * cols, 0.0);

    // Value-noise octaves.
    double amp = 1.0;
    for (int lattice = 4; lattice <= 32; lattice *= 2, amp *= 0.5) {
        const int n = lattice + 1;
        std::vector<double> lat(static_cast<std::size_t>(n) * n);
        for (auto& v : lat) v = u(rng);
        for (int r = 0; r < rows; ++r) {
            const double fy = static_cast<double>(r) / (rows - 1) * lattice;
            const int iy = std::min(static_cast<int>(fy), lattice - 1);
            const double ty = fy - iy;
            for (int c = 0; c < cols; ++c) {
                const double fx = static_cast<double>(c) / (cols - 1) * lattice;
                const int ix = std::min(static_cast<int>(fx), lattice - 1);
                const double tx = fx - ix;
                const double v00 = lat[iy * n + ix], v01 = lat[iy * n + ix + 1];
                const double v10 = lat[(iy + 1) * n + ix], v11 = lat[(iy + 1) * n + ix + 1];
                h[static_cast<std::size_t>(r) * cols + c] +=
                    amp * ((1 - ty) * ((1 - tx) * v00 + tx * v01) + ty * ((1 - tx) * v10 + tx * v11));
            }
        }
    }
    // Box-blur smoothing.
    for (int pass = 0; pass < 3; ++pass) {
        std::vector<double> out(h.size());
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) {
                double s = 0.0;
                int cnt = 0;
                for (int dr = -2; dr <= 2; ++dr)
                    for (int dc = -2; dc <= 2; ++dc) {
                        const int rr = std::clamp(r + dr, 0, rows - 1);
                        const int cc = std::clamp(c + dc, 0, cols - 1);
                        s += h[static_cast<std::size_t>(rr) * cols + cc];
                        ++cnt;
                    }
                out[static_cast<std::size_t>(r) * cols + c] = s / cnt;
            }
        h.swap(out);
    }
    const auto [lo_it, hi_it] = std::minmax_element(h.begin(), h.end());
    const double lo = *lo_it, span = std::max(*hi_it - lo, 1e-12);
    for (auto& v : h) v = min_depth + (max_depth - min_depth) * (v - lo) / span;
    return Terrain(rows, cols, cell, Vec2::Zero(), std::move(h));
}

Terrain Terrain::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open terrain file: " + path);
    char magic[8] = {};
    in.read(magic, 8);
    if (in && std::memcmp(magic, "AUVTBIN1", 8) == 0) {
        std::int32_t rows = 0, cols = 0;
        double hdr[3] = {};
        in.read(reinterpret_cast<char*>(&rows), sizeof rows);
        in.read(reinterpret_cast<char*>(&cols), sizeof cols);
        in.read(reinterpret_cast<char*>(hdr), sizeof hdr);
        if (!in || rows < 2 || cols < 2) throw IoError("bad binary terrain header: " + path);
        std::vector<double> d(static_cast<std::size_t>(rows) * cols);
        in.read(reinterpret_cast<char*>(d.data()), static_cast<std::streamsize>(d.size() * sizeof(double)));
        if (!in) throw IoError("truncated binary terrain: " + path);
        return Terrain(rows, cols, hdr[0], Vec2(hdr[1], hdr[2]), std::move(d));
    }
    in.clear();
    in.seekg(0);
    std::string tag;
    int version = 0;
    in >> tag >> version;
    if (tag != "AUVTERRAIN" || version != 1) throw IoError("unrecognized terrain format: " + path);
    int rows = 0, cols = 0;
    double cell = 0.0, x0 = 0.0, y0 = 0.0;
    in >> rows >> cols >> cell >> x0 >> y0;
    if (!in || rows < 2 || cols < 2) throw IoError("bad terrain header: " + path);
    std::vector<double> d(static_cast<std::size_t>(rows) * cols);
    for (auto& v : d)
        if (!(in >> v)) throw IoError("truncated terrain grid: " + path);
    return Terrain(rows, cols, cell, Vec2(x0, y0), std::move(d));
}

void Terrain::save_text(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write terrain file: " + path);
    out << std::setprecision(17) << "AUVTERRAIN 1\n"
        << rows_ << ' ' << cols_ << ' ' << cell_ << ' ' << origin_.x() << ' ' << origin_.y() << '\n';
    for (int r = 0; r < rows_; ++r) {
        for (int c = 0; c < cols_; ++c) out << (c ? " " : "") << node(r, c);
        out << '\n';
    }
}

void Terrain::save_binary(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write terrain file: " + path);
    const std::int32_t rows = rows_, cols = cols_;
    const double hdr[3] = {cell_, origin_.x(), origin_.y()};
    out.write("AUVTBIN1", 8);
    out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
    out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
    out.write(reinterpret_cast<const char*>(hdr), sizeof hdr);
    out.write(reinterpret_cast<const char*>(depths_.data()),
              static_cast<std::streamsize>(depths_.size() * sizeof(double)));
}

bool Terrain::contains(double x, double y) const {
    const Vec2 lo = extent_min(), hi = extent_max();
    return x >= lo.x() && x <= hi.x() && y >= lo.y() && y <= hi.y();
}

double Terrain::max_depth() const { return *std::max_element(depths_.begin(), depths_.end()); }
double Terrain::min_depth() const { return *std::min_element(depths_.begin(), depths_.end()); }

double Terrain::depth_at(double x, double y, bool* out_of_bounds) const {
    const Vec2 lo = extent_min(), hi = extent_max();
    const bool oob = !(x >= lo.x() && x <= hi.x() && y >= lo.y() && y <= hi.y());
    if (out_of_bounds) *out_of_bounds = oob;
    const double cx = (std::clamp(x, lo.x(), hi.x()) - origin_.x()) / cell_;
    const double cy = (std::clamp(y, lo.y(), hi.y()) - origin_.y()) / cell_;
    const int ix = std::min(static_cast<int>(cx), cols_ - 2);
    const int iy = std::min(static_cast<int>(cy), rows_ - 2);
    const double tx = cx - ix, ty = cy - iy;
    const double d00 = node(iy, ix), d01 = node(iy, ix + 1);
    const double d10 = node(iy + 1, ix), d11 = node(iy + 1, ix + 1);
    return (1 - ty) * ((1 - tx) * d00 + tx * d01) + ty * ((1 - tx) * d10 + tx * d11);
}

// ---------------------------------------------------------------------------
// Sea conditions

std::string to_string(SeaRegime r) {
    switch (r) {
        case SeaRegime::Calm: return "calm";
        case SeaRegime::ES: return "es";
        case SeaRegime::VES: return "ves";
    }
    return "calm";
}

SeaRegime sea_regime_from_string(const std::string& s) {
    std::string l;
    for (char c : s) l.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (l == "calm") return SeaRegime::Calm;
    if (l == "es") return SeaRegime::ES;
    if (l == "ves") return SeaRegime::VES;
    throw ConfigError("unknown sea condition '" + s + "' (expected calm, es or ves)");
}

SeaCondition SeaCondition::for_regime(SeaRegime r, const Vec3& current) {
    switch (r) {
        case SeaRegime::Calm: return calm();
        case SeaRegime::ES: return es(current);
        case SeaRegime::VES: return ves(current);
    }
    return calm();
}

double calibrate_wave_gain(const WaveField& field, const Vec3& current, const CalibrationGrid& grid,
                           double peak_speed) {
    const Vec2 c(current.x(), current.y());
    if (!(c.norm() < peak_speed)) throw InvalidParams("ambient current already exceeds the peak speed");
    const auto& comps = field.components();
    if (comps.empty()) return 0.0;

    const int nt = static_cast<int>(std::lround(grid.horizon * grid.rate)) + 1;
    const double dt = 1.0 / grid.rate;
    const double h = field.depth();
    const double c2 = c.squaredNorm();
    double best = std::numeric_limits<double>::infinity();

    std::vector<std::complex<double>> z(comps.size()), rot(comps.size());
    std::vector<double> cx(comps.size()), cy(comps.size());
    for (std::size_t m = 0; m < comps.size(); ++m) {
        rot[m] = std::polar(1.0, -comps[m].omega * dt);
        cx[m] = std::cos(comps[m].direction);
        cy[m] = std::sin(comps[m].direction);
    }
    for (int ix = 0; ix < grid.nx; ++ix) {
        for (int iy = 0; iy < grid.ny; ++iy) {
            const double x = grid.nx > 1 ? grid.min.x() + (grid.max.x() - grid.min.x()) * ix / (grid.nx - 1)
                                         : grid.min.x();
            const double y = grid.ny > 1 ? grid.min.y() + (grid.max.y() - grid.min.y()) * iy / (grid.ny - 1)
                                         : grid.min.y();
            for (std::size_t m = 0; m < comps.size(); ++m) {
                const auto& w = comps[m];
                const double att = (1.0 + std::exp(-2.0 * w.wavenumber * h)) /
                                   (1.0 - std::exp(-2.0 * w.wavenumber * h));
                z[m] = std::polar(w.amplitude * w.omega * att,
                                  w.wavenumber * (x * cx[m] + y * cy[m]) + w.phase);
            }
            for (int n = 0; n < nt; ++n) {
                double vx = 0.0, vy = 0.0;
                for (std::size_t m = 0; m < comps.size(); ++m) {
                    const double re = z[m].real();
                    vx += re * cx[m];
                    vy += re * cy[m];
                    z[m] *= rot[m];
                }
                const double v2 = vx * vx + vy * vy;
                if (v2 <= 0.0) continue;
                const double cv = c.x() * vx + c.y() * vy;
                const double s = (-cv + std::sqrt(cv * cv - v2 * (c2 - peak_speed * peak_speed))) / v2;
                best = std::min(best, s);
            }
        }
    }
    return std::isfinite(best) ? best : 0.0;
}

SeaState::SeaState(std::shared_ptr<const WaveField> field, SeaCondition condition, double wave_gain)
    : field_(std::move(field)), condition_(std::move(condition)), wave_gain_(wave_gain) {
    if (!field_) throw InvalidParams("sea state needs a wave field");
    if (!(wave_gain_ >= 0.0)) throw InvalidParams("wave gain must be >= 0");
}

SeaState SeaState::calm(double depth) {
    return SeaState(std::make_shared<WaveField>(WaveField::calm(depth)), SeaCondition::calm(), 0.0);
}

Vec3 SeaState::total_flow(const Vec3& pos, double t) const {
    Vec3 flow(condition_.current.x(), condition_.current.y(), 0.0);
    if (condition_.regime == SeaRegime::Calm) return flow;
    const double h = field_->depth();
    const double z = std::clamp(-pos.z(), -h, 0.0);
    const Vec2 v = field_->velocity(pos.x(), pos.y(), z, t, h);
    flow.x() += wave_gain_ * v.x();
    flow.y() += wave_gain_ * v.y();
    return condition_.scale * flow;
}

}  // namespace auvctl
