#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace graspe {

inline constexpr double kPi = 3.14159265358979323846;

// Wraps an angle into (-pi, pi]; the -pi boundary maps to +pi.
inline double normalize_angle(double a) {
    if (!std::isfinite(a)) throw std::invalid_argument("normalize_angle: non-finite input");
    double r = std::remainder(a, 2.0 * kPi);
    if (r <= -kPi) r = kPi;
    return r;
}

struct Pose2D {
    double x{0.0};
    double y{0.0};
    double theta{0.0}; // radians, kept in (-pi, pi]

    Pose2D() = default;
    Pose2D(double x_, double y_, double theta_) : x(x_), y(y_), theta(normalize_angle(theta_)) {}
};

struct VelocityCommand {
    double v{0.0};     // m/s
    double omega{0.0}; // rad/s

    friend bool operator==(const VelocityCommand& a, const VelocityCommand& b) {
        return a.v == b.v && a.omega == b.omega;
    }
};

// Fixed-length command history, oldest first.
struct VelocityHistory {
    std::vector<VelocityCommand> commands;

    static VelocityHistory zeros(int horizon) {
        VelocityHistory h;
        h.commands.assign(static_cast<std::size_t>(horizon), VelocityCommand{});
        return h;
    }

    // Drops the oldest entry and appends cmd; length is preserved.
    void push(const VelocityCommand& cmd) {
        if (commands.empty()) throw std::logic_error("VelocityHistory::push on empty history");
        commands.erase(commands.begin());
        commands.push_back(cmd);
    }

    int size() const { return static_cast<int>(commands.size()); }
};

struct ImageRaster {
    int width{0};
    int height{0};
    int channels{0};                 // 1 or 3
    std::vector<std::uint8_t> data;  // row-major, interleaved channels

    static ImageRaster filled(int w, int h, int c, std::uint8_t value) {
        ImageRaster img;
        img.width = w;
        img.height = h;
        img.channels = c;
        img.data.assign(static_cast<std::size_t>(w) * h * c, value);
        img.validate();
        return img;
    }

    std::uint8_t at(int x, int y, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::uint8_t& at(int x, int y, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    void validate() const {
        if (width <= 0 || height <= 0) throw std::invalid_argument("ImageRaster: non-positive dims");
        if (channels != 1 && channels != 3) throw std::invalid_argument("ImageRaster: channels must be 1 or 3");
        if (data.size() != static_cast<std::size_t>(width) * height * channels)
            throw std::invalid_argument("ImageRaster: data size mismatch");
    }
};

struct LidarPoint {
    double x{0.0}, y{0.0}, z{0.0}; // sensor frame, meters
    int ring{0};
};

struct PointCloud {
    std::vector<LidarPoint> points;
    int num_rings{0};

    int size() const { return static_cast<int>(points.size()); }

    void validate() const {
        for (const auto& p : points) {
            if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
                throw std::invalid_argument("PointCloud: non-finite coordinate");
            if (p.ring < 0 || (num_rings > 0 && p.ring >= num_rings))
                throw std::invalid_argument("PointCloud: ring id out of range");
        }
    }
};

// One time-step multi-sensor bundle.
struct Observation {
    ImageRaster image;      // 3-channel camera raster
    PointCloud cloud;
    VelocityHistory vel_history;
    ImageRaster traj_image; // 1-channel rasterized candidate trajectory

    void validate() const {
        image.validate();
        traj_image.validate();
        cloud.validate();
        if (image.channels != 3) throw std::invalid_argument("Observation: image must be 3-channel");
        if (traj_image.channels != 1) throw std::invalid_argument("Observation: traj_image must be 1-channel");
        if (image.width != traj_image.width || image.height != traj_image.height)
            throw std::invalid_argument("Observation: image/traj_image dims differ");
    }
};

// Per-step traversal success probabilities over the rollout horizon.
struct SuccessVector {
    std::vector<double> probs;

    SuccessVector() = default;
    explicit SuccessVector(std::vector<double> p) : probs(std::move(p)) {
        for (double v : probs)
            if (!(v >= 0.0 && v <= 1.0))
                throw std::invalid_argument("SuccessVector: entry outside [0,1]");
    }

    static SuccessVector ones(int horizon) {
        return SuccessVector(std::vector<double>(static_cast<std::size_t>(horizon), 1.0));
    }

    int size() const { return static_cast<int>(probs.size()); }

    double min() const {
        if (probs.empty()) throw std::logic_error("SuccessVector::min on empty vector");
        return *std::min_element(probs.begin(), probs.end());
    }
    double mean() const {
        if (probs.empty()) throw std::logic_error("SuccessVector::mean on empty vector");
        return std::accumulate(probs.begin(), probs.end(), 0.0) / static_cast<double>(probs.size());
    }
};

} // namespace graspe
