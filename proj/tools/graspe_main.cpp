// Command-line front end: record / train / eval / score / plot.
// Exit codes: 0 ok, 1 usage error, 2 data or config error, 3 training
// divergence.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "graspe/graspe.hpp"

namespace fs = std::filesystem;
using namespace graspe;
using run::json;

namespace {

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir{"out"};
};

run::ProjectConfig resolve_config(const CommonOpts& opts) {
    json j;
    {
        run::ProjectConfig defaults;
        defaults.sync();
        run::to_json(j, defaults);
    }
    if (!opts.config_path.empty()) {
        std::ifstream in(opts.config_path);
        if (!in) throw std::runtime_error("cannot open config file: " + opts.config_path);
        json file_j;
        in >> file_j;
        j.merge_patch(file_j);
    }
    for (const auto& o : opts.overrides) run::apply_override(j, o);
    run::ProjectConfig cfg;
    run::from_json(j, cfg);
    cfg.sync();
    return cfg;
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    const run::ProjectConfig& cfg, const json& extra) {
    json j;
    json cfg_j;
    run::to_json(cfg_j, cfg);
    j["command"] = command;
    j["config"] = cfg_j;
    j["config_hash"] = run::config_hash(cfg);
    j["outputs"] = extra;
    run::write_file(out_dir + "/manifest_" + command + ".json", j.dump(2) + "\n");
}

int cmd_record(const CommonOpts& opts, int episodes, std::uint64_t seed,
               const std::string& out_file) {
    run::ProjectConfig cfg = resolve_config(opts);
    if (episodes > 0) cfg.harness.episodes = episodes;
    cfg.harness.seed = seed;
    fs::create_directories(opts.out_dir);

    run::RecordStats stats;
    const auto samples = run::record_dataset(cfg.harness.episodes, cfg.harness.mix,
                                             cfg.harness.seed, cfg, &stats, cfg.harness.threads);
    run::DatasetHeader hdr;
    hdr.horizon = static_cast<std::uint32_t>(cfg.horizon);
    hdr.img_w = static_cast<std::uint32_t>(cfg.camera.width);
    hdr.img_h = static_cast<std::uint32_t>(cfg.camera.height);
    hdr.config_hash = run::config_hash(cfg);
    const std::string bytes = run::encode_dataset(samples, hdr);
    const std::string path = out_file.empty() ? opts.out_dir + "/dataset.bin" : out_file;
    run::write_file(path, bytes);

    json extra{{"dataset", path},
               {"samples", samples.size()},
               {"positives", stats.positives},
               {"negatives", stats.negatives},
               {"negative_fraction", stats.negative_fraction()},
               {"step_ones", stats.step_ones},
               {"step_zeros", stats.step_zeros}};
    write_manifest(opts.out_dir, "record", cfg, extra);
    std::cout << "recorded " << samples.size() << " samples (" << stats.positives << " positive, "
              << stats.negatives << " negative; negative fraction "
              << run::fmt_double(stats.negative_fraction()) << ") -> " << path << "\n";
    return 0;
}

int cmd_train(const CommonOpts& opts, const std::string& dataset_path,
              const std::string& checkpoint_out, const std::string& log_out) {
    run::ProjectConfig cfg = resolve_config(opts);
    fs::create_directories(opts.out_dir);

    const std::string bytes = run::read_file(dataset_path);
    run::DatasetHeader hdr;
    const auto samples = run::decode_dataset(bytes, hdr, cfg.lidar.rings);
    if (static_cast<int>(hdr.horizon) != cfg.horizon)
        throw std::runtime_error("dataset horizon does not match config");
    const std::uint64_t dataset_hash = run::fnv1a(bytes.data(), bytes.size());

    const auto artifacts = run::run_training(samples, dataset_hash, cfg);

    const std::string ckpt_path =
        checkpoint_out.empty() ? opts.out_dir + "/checkpoint.bin" : checkpoint_out;
    const std::string log_path = log_out.empty() ? opts.out_dir + "/train_log.csv" : log_out;
    run::write_file(ckpt_path, artifacts.checkpoint_bytes);
    run::write_file(log_path, artifacts.log_csv);

    json extra{{"checkpoint", ckpt_path},
               {"log", log_path},
               {"best_epoch", artifacts.result.best_epoch},
               {"best_val_loss", artifacts.result.best_val_loss},
               {"val_acc", artifacts.final_val_acc}};
    write_manifest(opts.out_dir, "train", cfg, extra);
    std::cout << "trained " << cfg.train.epochs << " epochs; best epoch "
              << artifacts.result.best_epoch << "; val balanced accuracy "
              << run::fmt_double(artifacts.final_val_acc) << " -> " << ckpt_path << "\n";
    return 0;
}

int cmd_eval(const CommonOpts& opts, const std::string& checkpoint_path,
             const std::vector<std::string>& suite_names,
             const std::vector<std::string>& difficulty_names, int episodes, std::uint64_t seed) {
    run::ProjectConfig cfg = resolve_config(opts);
    fs::create_directories(opts.out_dir);

    run::Checkpoint ckpt;
    bool have_ckpt = false;
    if (!checkpoint_path.empty()) {
        ckpt = run::decode_checkpoint(run::read_file(checkpoint_path));
        have_ckpt = true;
    }
    std::vector<run::Suite> suites;
    for (const auto& s : suite_names) suites.push_back(run::suite_from_name(s));
    std::vector<sim::Difficulty> difficulties;
    for (const auto& d : difficulty_names) difficulties.push_back(sim::difficulty_from_name(d));
    for (const auto s : suites)
        if (s != run::Suite::DwaBaseline && !have_ckpt)
            throw std::runtime_error("suite " + std::string(run::suite_name(s)) +
                                     " needs --checkpoint");
    if (!have_ckpt) {
        // baseline-only evaluation still needs parameter shapes
        ckpt.enc_params = enc::EncoderParams::init(cfg.encoders, 0);
        ckpt.gnn_params = fus::GnnParams::init(cfg.encoders.total_dim(), cfg.horizon, cfg.fusion, 0);
    }

    const auto reports = run::run_eval(suites, difficulties, episodes, seed, ckpt.enc_params,
                                       ckpt.gnn_params, cfg, cfg.harness.threads);
    const std::string reports_path = opts.out_dir + "/reports.jsonl";
    const std::string summary_path = opts.out_dir + "/summary.csv";
    run::write_file(reports_path, run::reports_jsonl(reports));
    const std::string csv = run::summary_csv(reports, suites, difficulties);
    run::write_file(summary_path, csv);

    json extra{{"reports", reports_path}, {"summary", summary_path}, {"episodes", episodes}};
    write_manifest(opts.out_dir, "eval", cfg, extra);
    std::cout << csv;
    return 0;
}

int cmd_score(const CommonOpts& opts, const std::string& image_path, const std::string& cloud_path) {
    run::ProjectConfig cfg = resolve_config(opts);
    if (image_path.empty() == cloud_path.empty())
        throw CLI::ValidationError("score", "pass exactly one of --image / --cloud");
    json j;
    if (!image_path.empty()) {
        const ImageRaster img = run::load_pnm(image_path);
        const auto r = rel::image_reliability(img, cfg.rel_image);
        j = json{{"kind", "image"},
                 {"r_bright", r.r_bright},
                 {"r_corners", r.r_corners},
                 {"n_c", r.n_c},
                 {"r_img", r.r_img}};
    } else {
        const PointCloud cloud = run::load_xyz(cloud_path);
        const auto r = rel::cloud_reliability(cloud, cfg.rel_cloud);
        j = json{{"kind", "cloud"},
                 {"r_edge", r.r_edge},
                 {"r_planar", r.r_planar},
                 {"edge_count", r.edge_count},
                 {"planar_count", r.planar_count},
                 {"r_point", r.r_point}};
    }
    std::cout << j.dump() << "\n";
    return 0;
}

int cmd_plot(const CommonOpts& opts, const std::string& reports_path) {
    run::ProjectConfig cfg = resolve_config(opts);
    fs::create_directories(opts.out_dir);
    const auto reports = run::parse_reports_jsonl(run::read_file(reports_path));
    if (reports.empty()) throw std::runtime_error("plot: no reports in " + reports_path);

    std::vector<run::Suite> suites;
    std::vector<sim::Difficulty> difficulties;
    json files = json::array();
    for (const auto& r : reports) {
        if (std::find(suites.begin(), suites.end(), r.suite) == suites.end())
            suites.push_back(r.suite);
        if (std::find(difficulties.begin(), difficulties.end(), r.difficulty) == difficulties.end())
            difficulties.push_back(r.difficulty);
        const std::string name = std::string("ep_") + run::suite_name(r.suite) + "_" +
                                 sim::difficulty_name(r.difficulty) + "_" +
                                 std::to_string(r.episode_index) + ".svg";
        run::write_file(opts.out_dir + "/" + name, run::episode_svg(r, cfg));
        files.push_back(name);
    }
    const std::string summary_path = opts.out_dir + "/summary.csv";
    run::write_file(summary_path, run::summary_csv(reports, suites, difficulties));

    json extra{{"summary", summary_path}, {"svg_count", files.size()}};
    write_manifest(opts.out_dir, "plot", cfg, extra);
    std::cout << "wrote " << files.size() << " episode SVGs and " << summary_path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"reliability-aware traversability prediction and planning sandbox"};
    app.require_subcommand(1);
    app.fallthrough(true);

    CommonOpts common;
    app.add_option("--config", common.config_path, "JSON config file");
    app.add_option("--set", common.overrides, "config override, section.key=value");
    app.add_option("--out", common.out_dir, "output directory");

    auto* rec = app.add_subcommand("record", "record a labeled dataset with the random-walk policy");
    int episodes = 0;
    std::uint64_t seed = 0;
    std::string out_file, dataset_path, checkpoint_path, log_path, reports_path;
    rec->add_option("--episodes", episodes, "episode count (default from config)");
    rec->add_option("--seed", seed, "run seed");
    rec->add_option("--dataset", out_file, "output dataset path");

    auto* tr = app.add_subcommand("train", "train the prediction model on a dataset");
    tr->add_option("--dataset", dataset_path, "dataset file")->required();
    tr->add_option("--checkpoint", checkpoint_path, "output checkpoint path");
    tr->add_option("--log", log_path, "output CSV log path");

    auto* ev = app.add_subcommand("eval", "run closed-loop episode evaluation");
    std::vector<std::string> suite_names{"graspe", "graspe_no_reliability", "dwa_baseline"};
    std::vector<std::string> difficulty_names{"cluttered", "open"};
    int eval_episodes = 50;
    std::uint64_t eval_seed = 0;
    ev->add_option("--checkpoint", checkpoint_path, "trained checkpoint");
    ev->add_option("--suites", suite_names, "suites to run");
    ev->add_option("--difficulties", difficulty_names, "difficulty presets");
    ev->add_option("--episodes", eval_episodes, "episodes per (suite, difficulty)");
    ev->add_option("--seed", eval_seed, "evaluation seed");

    auto* sc = app.add_subcommand("score", "print a reliability record for an image or cloud file");
    std::string image_path, cloud_path;
    sc->add_option("--image", image_path, "PGM/PPM image file");
    sc->add_option("--cloud", cloud_path, "text cloud file: x y z ring per line");

    auto* pl = app.add_subcommand("plot", "emit episode SVGs and the summary CSV from eval reports");
    pl->add_option("--reports", reports_path, "reports.jsonl from eval")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (rec->parsed()) return cmd_record(common, episodes, seed, out_file);
        if (tr->parsed()) return cmd_train(common, dataset_path, checkpoint_path, log_path);
        if (ev->parsed())
            return cmd_eval(common, checkpoint_path, suite_names, difficulty_names, eval_episodes,
                            eval_seed);
        if (sc->parsed()) return cmd_score(common, image_path, cloud_path);
        if (pl->parsed()) return cmd_plot(common, reports_path);
    } catch (const fus::TrainingDiverged& e) {
        std::cerr << "training diverged: " << e.what() << "\n";
        return 3;
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
