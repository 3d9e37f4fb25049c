#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "graspe/enc/encoders.hpp"
#include "graspe/fus/gnn.hpp"
#include "graspe/run/config.hpp"
#include "graspe/sim/terrain.hpp"

namespace graspe::run {

// ---- little-endian binary primitives ---------------------------------------

namespace bin {

template <typename T>
inline void put(std::string& out, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

struct Reader {
    const std::string& data;
    std::size_t pos{0};

    template <typename T>
    T get() {
        static_assert(std::is_trivially_copyable_v<T>);
        if (pos + sizeof(T) > data.size()) throw std::runtime_error("binary read past end");
        T v;
        std::memcpy(&v, data.data() + pos, sizeof(T));
        pos += sizeof(T);
        return v;
    }

    std::string get_bytes(std::size_t n) {
        if (pos + n > data.size()) throw std::runtime_error("binary read past end");
        std::string s = data.substr(pos, n);
        pos += n;
        return s;
    }
};

} // namespace bin

inline void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---- dataset container ------------------------------------------------------
// magic GRSPDAT1 | version u32 | T u32 | img w,h u32 | config_hash u64 |
// count u64 | records. Each record is length-prefixed (u32) and holds
// meta (world_seed u64, difficulty u8, step_index u32), the camera raster,
// the trajectory raster, the cloud (f32 xyz + u16 ring), the velocity
// history (f64 pairs) and the binary label (u8 per step).

struct Sample {
    Observation observation;
    SuccessVector label;
    std::uint64_t world_seed{0};
    sim::Difficulty difficulty{sim::Difficulty::Open};
    int step_index{0};
};

inline constexpr char kDatasetMagic[8] = {'G', 'R', 'S', 'P', 'D', 'A', 'T', '1'};

struct DatasetHeader {
    std::uint32_t version{1};
    std::uint32_t horizon{10};
    std::uint32_t img_w{64}, img_h{64};
    std::uint64_t config_hash{0};
    std::uint64_t count{0};
};

inline std::string encode_sample(const Sample& s) {
    std::string r;
    bin::put<std::uint64_t>(r, s.world_seed);
    bin::put<std::uint8_t>(r, static_cast<std::uint8_t>(s.difficulty));
    bin::put<std::uint32_t>(r, static_cast<std::uint32_t>(s.step_index));
    r.append(reinterpret_cast<const char*>(s.observation.image.data.data()),
             s.observation.image.data.size());
    r.append(reinterpret_cast<const char*>(s.observation.traj_image.data.data()),
             s.observation.traj_image.data.size());
    bin::put<std::uint32_t>(r, static_cast<std::uint32_t>(s.observation.cloud.size()));
    for (const auto& p : s.observation.cloud.points) {
        bin::put<float>(r, static_cast<float>(p.x));
        bin::put<float>(r, static_cast<float>(p.y));
        bin::put<float>(r, static_cast<float>(p.z));
        bin::put<std::uint16_t>(r, static_cast<std::uint16_t>(p.ring));
    }
    for (const auto& c : s.observation.vel_history.commands) {
        bin::put<double>(r, c.v);
        bin::put<double>(r, c.omega);
    }
    for (double v : s.label.probs) bin::put<std::uint8_t>(r, v >= 0.5 ? 1 : 0);
    return r;
}

inline std::string encode_dataset(const std::vector<Sample>& samples, const DatasetHeader& hdr) {
    std::string out(kDatasetMagic, sizeof(kDatasetMagic));
    bin::put<std::uint32_t>(out, hdr.version);
    bin::put<std::uint32_t>(out, hdr.horizon);
    bin::put<std::uint32_t>(out, hdr.img_w);
    bin::put<std::uint32_t>(out, hdr.img_h);
    bin::put<std::uint64_t>(out, hdr.config_hash);
    bin::put<std::uint64_t>(out, static_cast<std::uint64_t>(samples.size()));
    for (const auto& s : samples) {
        const std::string rec = encode_sample(s);
        bin::put<std::uint32_t>(out, static_cast<std::uint32_t>(rec.size()));
        out += rec;
    }
    return out;
}

inline std::vector<Sample> decode_dataset(const std::string& bytes, DatasetHeader& hdr,
                                          int lidar_rings) {
    bin::Reader r{bytes};
    if (r.get_bytes(8) != std::string(kDatasetMagic, 8))
        throw std::runtime_error("dataset: bad magic");
    hdr.version = r.get<std::uint32_t>();
    if (hdr.version != 1) throw std::runtime_error("dataset: unsupported version");
    hdr.horizon = r.get<std::uint32_t>();
    hdr.img_w = r.get<std::uint32_t>();
    hdr.img_h = r.get<std::uint32_t>();
    hdr.config_hash = r.get<std::uint64_t>();
    hdr.count = r.get<std::uint64_t>();

    std::vector<Sample> samples;
    samples.reserve(hdr.count);
    for (std::uint64_t i = 0; i < hdr.count; ++i) {
        const auto rec_len = r.get<std::uint32_t>();
        const std::size_t rec_end = r.pos + rec_len;
        Sample s;
        s.world_seed = r.get<std::uint64_t>();
        s.difficulty = static_cast<sim::Difficulty>(r.get<std::uint8_t>());
        s.step_index = static_cast<int>(r.get<std::uint32_t>());

        s.observation.image.width = static_cast<int>(hdr.img_w);
        s.observation.image.height = static_cast<int>(hdr.img_h);
        s.observation.image.channels = 3;
        const std::string img = r.get_bytes(static_cast<std::size_t>(hdr.img_w) * hdr.img_h * 3);
        s.observation.image.data.assign(img.begin(), img.end());

        s.observation.traj_image.width = static_cast<int>(hdr.img_w);
        s.observation.traj_image.height = static_cast<int>(hdr.img_h);
        s.observation.traj_image.channels = 1;
        const std::string traj = r.get_bytes(static_cast<std::size_t>(hdr.img_w) * hdr.img_h);
        s.observation.traj_image.data.assign(traj.begin(), traj.end());

        const auto n_points = r.get<std::uint32_t>();
        s.observation.cloud.num_rings = lidar_rings;
        s.observation.cloud.points.resize(n_points);
        for (auto& p : s.observation.cloud.points) {
            p.x = r.get<float>();
            p.y = r.get<float>();
            p.z = r.get<float>();
            p.ring = r.get<std::uint16_t>();
        }

        s.observation.vel_history.commands.resize(hdr.horizon);
        for (auto& c : s.observation.vel_history.commands) {
            c.v = r.get<double>();
            c.omega = r.get<double>();
        }

        std::vector<double> label(hdr.horizon);
        for (auto& v : label) v = r.get<std::uint8_t>() != 0 ? 1.0 : 0.0;
        s.label = SuccessVector(std::move(label));

        if (r.pos != rec_end) throw std::runtime_error("dataset: record length mismatch");
        samples.push_back(std::move(s));
    }
    return samples;
}

// ---- checkpoint ---------------------------------------------------------------
// magic GRSPCKP1 | version u32 | config json (u32 len + bytes) |
// dataset_hash u64 | tensor count u32 | tensors (name, rows, cols, f64 data).

inline constexpr char kCheckpointMagic[8] = {'G', 'R', 'S', 'P', 'C', 'K', 'P', '1'};

struct Checkpoint {
    enc::EncoderParams enc_params;
    fus::GnnParams gnn_params;
    std::string config_json;
    std::uint64_t dataset_hash{0};
};

namespace detail {

inline void put_tensor(std::string& out, const std::string& name, const Matrix& m) {
    bin::put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    bin::put<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows));
    bin::put<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols));
    for (double v : m.a) bin::put<double>(out, v);
}

inline void put_tensor(std::string& out, const std::string& name, const Vec& v) {
    Matrix m(1, static_cast<int>(v.size()));
    m.a = v;
    put_tensor(out, name, m);
}

struct TensorReader {
    bin::Reader& r;

    Matrix next(const std::string& expect) {
        const auto name_len = r.get<std::uint32_t>();
        const std::string name = r.get_bytes(name_len);
        if (name != expect) throw std::runtime_error("checkpoint: expected tensor " + expect);
        const auto rows = r.get<std::uint32_t>();
        const auto cols = r.get<std::uint32_t>();
        Matrix m(static_cast<int>(rows), static_cast<int>(cols));
        for (double& v : m.a) v = r.get<double>();
        return m;
    }

    Vec next_vec(const std::string& expect) { return next(expect).a; }
};

} // namespace detail

inline std::string encode_checkpoint(const Checkpoint& c) {
    std::string out(kCheckpointMagic, sizeof(kCheckpointMagic));
    bin::put<std::uint32_t>(out, 1u);
    bin::put<std::uint32_t>(out, static_cast<std::uint32_t>(c.config_json.size()));
    out += c.config_json;
    bin::put<std::uint64_t>(out, c.dataset_hash);

    std::string tensors;
    std::uint32_t count = 0;
    auto add = [&](const std::string& name, const auto& t) {
        detail::put_tensor(tensors, name, t);
        ++count;
    };
    add("enc.img1.w", c.enc_params.img1.w);
    add("enc.img1.b", c.enc_params.img1.b);
    add("enc.img2.w", c.enc_params.img2.w);
    add("enc.img2.b", c.enc_params.img2.b);
    add("enc.point1.w", c.enc_params.point1.w);
    add("enc.point1.b", c.enc_params.point1.b);
    add("enc.vel1.w", c.enc_params.vel1.w);
    add("enc.vel1.b", c.enc_params.vel1.b);
    add("enc.traj1.w", c.enc_params.traj1.w);
    add("enc.traj1.b", c.enc_params.traj1.b);
    add("enc.traj2.w", c.enc_params.traj2.w);
    add("enc.traj2.b", c.enc_params.traj2.b);
    add("gnn.theta1", c.gnn_params.theta1);
    add("gnn.theta2", c.gnn_params.theta2);
    add("gnn.theta_g", c.gnn_params.theta_g);
    add("gnn.a_src", c.gnn_params.a_src);
    add("gnn.a_dst", c.gnn_params.a_dst);
    add("gnn.w_read", c.gnn_params.w_read);
    add("gnn.b_read", c.gnn_params.b_read);

    bin::put<std::uint32_t>(out, count);
    out += tensors;
    return out;
}

inline Checkpoint decode_checkpoint(const std::string& bytes) {
    bin::Reader r{bytes};
    if (r.get_bytes(8) != std::string(kCheckpointMagic, 8))
        throw std::runtime_error("checkpoint: bad magic");
    if (r.get<std::uint32_t>() != 1) throw std::runtime_error("checkpoint: unsupported version");
    Checkpoint c;
    c.config_json = r.get_bytes(r.get<std::uint32_t>());
    c.dataset_hash = r.get<std::uint64_t>();
    const auto count = r.get<std::uint32_t>();
    if (count != 19) throw std::runtime_error("checkpoint: unexpected tensor count");
    detail::TensorReader tr{r};
    c.enc_params.img1.w = tr.next("enc.img1.w");
    c.enc_params.img1.b = tr.next_vec("enc.img1.b");
    c.enc_params.img2.w = tr.next("enc.img2.w");
    c.enc_params.img2.b = tr.next_vec("enc.img2.b");
    c.enc_params.point1.w = tr.next("enc.point1.w");
    c.enc_params.point1.b = tr.next_vec("enc.point1.b");
    c.enc_params.vel1.w = tr.next("enc.vel1.w");
    c.enc_params.vel1.b = tr.next_vec("enc.vel1.b");
    c.enc_params.traj1.w = tr.next("enc.traj1.w");
    c.enc_params.traj1.b = tr.next_vec("enc.traj1.b");
    c.enc_params.traj2.w = tr.next("enc.traj2.w");
    c.enc_params.traj2.b = tr.next_vec("enc.traj2.b");
    c.gnn_params.theta1 = tr.next("gnn.theta1");
    c.gnn_params.theta2 = tr.next("gnn.theta2");
    c.gnn_params.theta_g = tr.next("gnn.theta_g");
    c.gnn_params.a_src = tr.next_vec("gnn.a_src");
    c.gnn_params.a_dst = tr.next_vec("gnn.a_dst");
    c.gnn_params.w_read = tr.next("gnn.w_read");
    c.gnn_params.b_read = tr.next_vec("gnn.b_read");
    return c;
}

// ---- external image / cloud files for the score subcommand --------------------

// Binary PGM (P5) or PPM (P6), maxval 255.
inline ImageRaster load_pnm(const std::string& path) {
    const std::string bytes = read_file(path);
    std::istringstream in(bytes);
    std::string magic;
    in >> magic;
    if (magic != "P5" && magic != "P6") throw std::runtime_error("load_pnm: expected P5/P6");
    int w = 0, h = 0, maxval = 0;
    auto next_int = [&](int& out) {
        // skip whitespace and '#' comments
        while (true) {
            const int ch = in.peek();
            if (ch == '#') {
                std::string line;
                std::getline(in, line);
            } else if (std::isspace(ch)) {
                in.get();
            } else {
                break;
            }
        }
        in >> out;
    };
    next_int(w);
    next_int(h);
    next_int(maxval);
    if (maxval != 255) throw std::runtime_error("load_pnm: maxval must be 255");
    in.get(); // single whitespace before raster
    ImageRaster img;
    img.width = w;
    img.height = h;
    img.channels = magic == "P6" ? 3 : 1;
    const std::size_t n = static_cast<std::size_t>(w) * h * img.channels;
    const std::size_t offset = static_cast<std::size_t>(in.tellg());
    if (bytes.size() < offset + n) throw std::runtime_error("load_pnm: truncated raster");
    img.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                    bytes.begin() + static_cast<std::ptrdiff_t>(offset + n));
    img.validate();
    return img;
}

inline std::string save_pnm(const ImageRaster& img) {
    img.validate();
    std::string out = img.channels == 3 ? "P6\n" : "P5\n";
    out += std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(img.data.data()), img.data.size());
    return out;
}

// Plain-text cloud: one "x y z ring" line per point.
inline PointCloud load_xyz(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_xyz: cannot open " + path);
    PointCloud cloud;
    double x, y, z;
    int ring;
    int max_ring = -1;
    while (in >> x >> y >> z >> ring) {
        cloud.points.push_back({x, y, z, ring});
        max_ring = std::max(max_ring, ring);
    }
    cloud.num_rings = max_ring + 1;
    cloud.validate();
    return cloud;
}

} // namespace graspe::run
