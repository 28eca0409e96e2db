// gestrec: one-shot gesture classifier toolkit.
//
// Subcommands cover the full pipeline: synthesizing datasets, quantizing raw
// orientation recordings, learning the shared prior and per-class posteriors,
// classification, the repeated-split evaluation harness, and key-gesture
// detection on orientation streams.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gestrec/gestrec.hpp"

namespace fs = std::filesystem;
using namespace gestrec;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

std::string fmt(double v) { return io_detail::fmt(v); }

Quat parse_quat_flag(const std::string& text) {
    const auto parts = io_detail::split(text, ',');
    if (parts.size() != 4)
        throw DataError("expected quaternion as w,x,y,z; got '" + text + "'");
    return Quat(io_detail::parse_double(parts[0], "--ref"),
                io_detail::parse_double(parts[1], "--ref"),
                io_detail::parse_double(parts[2], "--ref"),
                io_detail::parse_double(parts[3], "--ref"));
}

Vec3 parse_vec_flag(const std::string& text, const std::string& flag) {
    const auto parts = io_detail::split(text, ',');
    if (parts.size() != 3) throw DataError(flag + " expects x,y,z");
    return Vec3{io_detail::parse_double(parts[0], flag), io_detail::parse_double(parts[1], flag),
                io_detail::parse_double(parts[2], flag)}
        .normalized();
}

// Grid resolution order: explicit --grid file, then the recordings' grid id
// ("axes6" or "fib<N>" are built in).
QuantizerGrid resolve_grid(const std::string& grid_path, const std::string& grid_id) {
    if (!grid_path.empty()) return load_grid(grid_path);
    if (grid_id.empty() || grid_id == "axes6") return default_grid();
    if (grid_id.rfind("fib", 0) == 0) {
        const long n = io_detail::parse_long(grid_id.substr(3), "grid id");
        return fibonacci_grid(static_cast<std::size_t>(n));
    }
    throw DataError("unknown grid id '" + grid_id + "'; pass --grid <file>");
}

std::string common_grid_id(const std::vector<Recording>& recs) {
    std::string id;
    for (const Recording& r : recs) {
        if (id.empty()) id = r.grid_id;
        if (!r.grid_id.empty() && r.grid_id != id)
            throw DataError("recordings mix grid ids '" + id + "' and '" + r.grid_id + "'");
    }
    return id;
}

std::vector<std::pair<std::string, std::vector<ObsSeq>>> group_by_class(
    const std::vector<Recording>& recs, const QuantizerGrid& grid, const Quat& q_ref) {
    std::vector<std::pair<std::string, std::vector<ObsSeq>>> by_class;
    for (const Recording& rec : recs) {
        if (rec.class_label.empty())
            throw DataError("evaluate needs class labels on every recording");
        const ObsSeq y = to_obs_seq(rec, grid, q_ref);
        bool found = false;
        for (auto& [label, seqs] : by_class)
            if (label == rec.class_label) {
                seqs.push_back(y);
                found = true;
            }
        if (!found) by_class.emplace_back(rec.class_label, std::vector<ObsSeq>{y});
    }
    return by_class;
}

struct VbFlags {
    std::size_t hidden = 6;
    double alpha0 = 1.0;
    int max_iters = 500;
    double tol = 1e-4;
    double jitter = 0.01;
    int restarts = 6;

    void attach(CLI::App* cmd) {
        cmd->add_option("--hidden", hidden, "number of hidden states M")->capture_default_str();
        cmd->add_option("--alpha0", alpha0, "uninformative prior value")->capture_default_str();
        cmd->add_option("--max-iters", max_iters, "variational iteration cap")
            ->capture_default_str();
        cmd->add_option("--tol", tol, "convergence threshold on hyperparameter change")
            ->capture_default_str();
        cmd->add_option("--jitter", jitter, "symmetry-breaking perturbation")
            ->capture_default_str();
        cmd->add_option("--restarts", restarts, "seeded restarts for shared-prior fits")
            ->capture_default_str();
    }

    VbConfig config(std::uint64_t seed) const {
        VbConfig cfg;
        cfg.max_iters = max_iters;
        cfg.tol = tol;
        cfg.alpha0 = alpha0;
        cfg.jitter = jitter;
        cfg.restarts = restarts;
        cfg.seed = seed;
        return cfg;
    }
};

int cmd_generate(const SynthSpec& spec, const std::string& out_dir) {
    const SynthDataset dataset = generate_dataset(spec);
    fs::create_directories(out_dir);
    save_recordings((fs::path(out_dir) / "dataset.rec").string(), dataset.recordings);
    save_manifest((fs::path(out_dir) / "manifest.txt").string(), dataset.manifest);
    const QuantizerGrid grid =
        spec.alphabet == 6 ? default_grid() : fibonacci_grid(spec.alphabet);
    save_grid((fs::path(out_dir) / "grid.txt").string(), grid,
              spec.alphabet == 6 ? "axes6" : "fib" + std::to_string(spec.alphabet));
    std::cout << "wrote " << dataset.recordings.size() << " recordings in "
              << spec.num_classes << " classes to " << out_dir << "\n";
    return 0;
}

int cmd_quantize(const std::string& in, const std::string& out, const std::string& grid_path,
                 const Quat& q_ref) {
    const std::vector<Recording> recs = load_recordings(in);
    const QuantizerGrid grid = resolve_grid(grid_path, common_grid_id(recs));
    std::vector<Recording> quantized;
    std::size_t converted = 0;
    for (const Recording& rec : recs) {
        Recording q = rec;
        if (rec.has_quats()) {
            q.symbols = quantize_stream(rec.quats, q_ref, grid).symbols();
            q.quats.clear();
            ++converted;
        }
        quantized.push_back(std::move(q));
    }
    save_recordings(out, quantized);
    std::cout << "quantized " << converted << " of " << recs.size() << " recordings to " << out
              << "\n";
    return 0;
}

int cmd_train_prior(const std::string& data_path, const std::string& out, const VbFlags& vb,
                    std::uint64_t seed, const std::string& grid_path, const Quat& q_ref) {
    const std::vector<Recording> recs = load_recordings(data_path);
    if (recs.empty()) throw DataError("no recordings in " + data_path);
    const QuantizerGrid grid = resolve_grid(grid_path, common_grid_id(recs));
    std::vector<ObsSeq> data;
    for (const Recording& rec : recs) data.push_back(to_obs_seq(rec, grid, q_ref));
    VbTrace trace;
    const DirichletHmm prior = learn_shared_prior(data, vb.hidden, vb.config(seed), &trace);
    save_model(out, prior);
    std::cout << "learned shared prior (M=" << prior.num_states() << ", N="
              << prior.alphabet_size() << ") from " << data.size() << " sequences in "
              << trace.iterations << " iterations"
              << (trace.converged ? "" : " (iteration cap hit)") << "\n";
    return 0;
}

int cmd_train_class(const std::string& label, const std::string& data_path,
                    const std::string& prior_path, const std::string& registry_path,
                    const std::string& out, const VbFlags& vb, std::uint64_t seed,
                    const std::string& grid_path, const Quat& q_ref) {
    if (prior_path.empty() == registry_path.empty())
        throw DataError("pass exactly one of --prior (new registry) or --registry (extend)");
    const std::vector<Recording> recs = load_recordings(data_path);

    std::optional<ClassRegistry> reg;
    if (!registry_path.empty()) {
        reg.emplace(load_registry(registry_path));
    } else {
        DirichletHmm prior = load_model(prior_path);
        QuantizerGrid grid = resolve_grid(grid_path, common_grid_id(recs));
        reg.emplace(std::move(prior), std::move(grid));
    }

    std::vector<ObsSeq> class_data;
    for (const Recording& rec : recs)
        if (rec.class_label == label)
            class_data.push_back(to_obs_seq(rec, reg->grid(), q_ref));
    if (class_data.empty()) {
        // A file holding only unlabeled recordings trains in full.
        for (const Recording& rec : recs)
            if (rec.class_label.empty())
                class_data.push_back(to_obs_seq(rec, reg->grid(), q_ref));
    }
    if (class_data.empty())
        throw DataError("no recordings for class '" + label + "' in " + data_path);

    reg = register_class(std::move(*reg), label, class_data, vb.config(seed));
    save_registry(out, *reg);
    std::cout << "registered class '" << label << "' from " << class_data.size()
              << " recordings; registry now holds " << reg->size() << " classes\n";
    return 0;
}

int cmd_classify(const std::string& registry_path, const std::string& in, const Quat& q_ref) {
    const ClassRegistry reg = load_registry(registry_path);
    const std::vector<Recording> recs = load_recordings(in);
    std::size_t idx = 0;
    for (const Recording& rec : recs) {
        const ObsSeq y = to_obs_seq(rec, reg.grid(), q_ref);
        const Classification c = classify(reg, y);
        std::cout << idx++ << " predicted=" << c.label
                  << " truth=" << (rec.class_label.empty() ? "-" : rec.class_label) << " scores=";
        for (std::size_t i = 0; i < c.scores.size(); ++i)
            std::cout << (i ? "," : "") << c.scores[i].first << ':' << fmt(c.scores[i].second);
        std::cout << "\n";
    }
    return 0;
}

int cmd_evaluate(const std::string& data_path, const ExperimentSpec& spec,
                 const std::string& csv_path, const std::string& grid_path, const Quat& q_ref) {
    const std::vector<Recording> recs = load_recordings(data_path);
    const QuantizerGrid grid = resolve_grid(grid_path, common_grid_id(recs));
    const auto by_class = group_by_class(recs, grid, q_ref);
    const ExperimentResult result = run_experiment(by_class, spec, grid);

    std::cout << "repetition arm recognition_rate\n";
    for (const auto& row : result.rows)
        std::cout << row.repetition << ' ' << row.arm << ' ' << fmt(row.rate) << "\n";
    std::cout << "-- summary over " << spec.repetitions << " repetitions --\n";
    for (const auto& s : result.summary)
        std::cout << s.arm << " mean=" << fmt(s.mean) << " stddev=" << fmt(s.stddev) << "\n";
    if (!csv_path.empty()) {
        write_experiment_csv(csv_path, result);
        std::cout << "wrote " << csv_path << "\n";
    }
    return 0;
}

int cmd_stream(const std::string& in, const std::string& registry_path, double window_s,
               const KeyGestureDetector& det, const Quat& q_ref) {
    const ClassRegistry reg = load_registry(registry_path);
    const auto stream = load_stream(in);
    const auto events = run_stream(stream, det, reg, window_s, q_ref);
    for (const StreamEvent& ev : events) {
        std::cout << "t=" << fmt(ev.trigger_time_s) << " label=" << ev.label << " scores=";
        for (std::size_t i = 0; i < ev.scores.size(); ++i)
            std::cout << (i ? "," : "") << ev.scores[i].first << ':' << fmt(ev.scores[i].second);
        std::cout << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"one-shot gesture classifier toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from a config file");
    app.footer("Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.");

    std::uint64_t seed = 0;
    std::string grid_path;
    std::string ref_text = "1,0,0,0";

    // generate
    auto* generate = app.add_subcommand("generate", "synthesize a labeled gesture dataset");
    SynthSpec synth;
    std::string out_dir;
    generate->add_option("--classes", synth.num_classes, "number of gesture classes")
        ->capture_default_str();
    generate->add_option("--hidden", synth.hidden_states, "hidden states per class HMM")
        ->capture_default_str();
    generate->add_option("--alphabet", synth.alphabet, "quantization alphabet size")
        ->capture_default_str();
    generate->add_option("--min-len", synth.min_len, "minimum sequence length")
        ->capture_default_str();
    generate->add_option("--max-len", synth.max_len, "maximum sequence length")
        ->capture_default_str();
    generate->add_option("--per-class", synth.per_class, "sequences per class")
        ->capture_default_str();
    generate->add_option("--min-tour", synth.min_tour, "smallest direction subset per class")
        ->capture_default_str();
    generate->add_option("--max-tour", synth.max_tour, "largest direction subset per class")
        ->capture_default_str();
    generate->add_option("--dwell", synth.dwell, "probability of holding a direction")
        ->capture_default_str();
    generate->add_option("--step-noise", synth.step_noise, "share of off-tour-order advances")
        ->capture_default_str();
    generate->add_option("--stray-hold", synth.stray_hold,
                         "persistence of a stray direction before rejoining the tour")
        ->capture_default_str();
    generate->add_option("--emis-self", synth.emis_self, "probability a state emits its own symbol")
        ->capture_default_str();
    generate->add_option("--wobble", synth.dwell_wobble, "per-recording dwell jitter")
        ->capture_default_str();
    generate->add_option("--seed", seed, "random seed")->capture_default_str();
    generate->add_option("--out", out_dir, "output directory")->required();

    // quantize
    auto* quantize_cmd = app.add_subcommand("quantize", "quantize quaternion recordings");
    std::string in_path, out_path;
    quantize_cmd->add_option("--in", in_path, "input recordings file")->required();
    quantize_cmd->add_option("--out", out_path, "output recordings file")->required();
    quantize_cmd->add_option("--grid", grid_path, "quantizer grid file");
    quantize_cmd->add_option("--ref", ref_text, "synchronization reference quaternion w,x,y,z")
        ->capture_default_str();

    // train-prior
    auto* train_prior = app.add_subcommand("train-prior", "learn a shared prior from recordings");
    VbFlags vb;
    std::string data_path, model_out;
    train_prior->add_option("--data", data_path, "recordings file")->required();
    train_prior->add_option("--out", model_out, "output model file")->required();
    vb.attach(train_prior);
    train_prior->add_option("--seed", seed, "random seed")->capture_default_str();
    train_prior->add_option("--grid", grid_path, "quantizer grid file");
    train_prior->add_option("--ref", ref_text, "reference quaternion w,x,y,z")
        ->capture_default_str();

    // train-class
    auto* train_class = app.add_subcommand("train-class", "train one gesture class");
    std::string label, prior_path, registry_path;
    VbFlags vb_class;
    train_class->add_option("--label", label, "class label")->required();
    train_class->add_option("--data", data_path, "recordings file")->required();
    train_class->add_option("--prior", prior_path, "shared prior model (creates a registry)");
    train_class->add_option("--registry", registry_path, "existing registry to extend");
    train_class->add_option("--out", model_out, "output registry file")->required();
    vb_class.attach(train_class);
    train_class->add_option("--seed", seed, "random seed")->capture_default_str();
    train_class->add_option("--grid", grid_path, "quantizer grid file");
    train_class->add_option("--ref", ref_text, "reference quaternion w,x,y,z")
        ->capture_default_str();

    // classify
    auto* classify_cmd = app.add_subcommand("classify", "classify recordings with a registry");
    classify_cmd->add_option("--registry", registry_path, "registry file")->required();
    classify_cmd->add_option("--in", in_path, "recordings file")->required();
    classify_cmd->add_option("--ref", ref_text, "reference quaternion w,x,y,z")
        ->capture_default_str();

    // evaluate
    auto* evaluate_cmd = app.add_subcommand(
        "evaluate",
        "repeated random-split comparison of the hmm-prior, hmm and dtw arms; "
        "CSV columns: repetition,arm,recognition_rate");
    ExperimentSpec exp;
    VbFlags vb_eval;
    std::string csv_path, policy_text = "both";
    evaluate_cmd->add_option("--data", data_path, "labeled recordings file")->required();
    evaluate_cmd->add_option("--train-per-class", exp.train_per_class, "training recordings per class")
        ->capture_default_str();
    evaluate_cmd->add_option("--test-per-class", exp.test_per_class, "test recordings per class")
        ->capture_default_str();
    evaluate_cmd->add_option("--repetitions", exp.repetitions, "number of reshuffled splits")
        ->capture_default_str();
    evaluate_cmd
        ->add_option("--prior-policy", policy_text,
                     "which HMM arms to run: learned, uninformative or both")
        ->check(CLI::IsMember({"learned", "uninformative", "both"}))
        ->capture_default_str();
    evaluate_cmd->add_flag("--exclude-prior-recs", exp.exclude_prior_recordings,
                           "drop prior-construction recordings from class training");
    bool no_dtw = false;
    evaluate_cmd->add_flag("--no-dtw", no_dtw, "skip the DTW baseline arm");
    vb_eval.attach(evaluate_cmd);
    evaluate_cmd->add_option("--seed", seed, "random seed")->capture_default_str();
    evaluate_cmd->add_option("--csv", csv_path, "write per-repetition rates as CSV");
    evaluate_cmd->add_option("--grid", grid_path, "quantizer grid file");
    evaluate_cmd->add_option("--ref", ref_text, "reference quaternion w,x,y,z")
        ->capture_default_str();

    // stream
    auto* stream_cmd = app.add_subcommand("stream", "detect and classify gestures in a stream");
    KeyGestureDetector det;
    double window_s = 3.0;
    std::string palm_text = "0,1,0", up_text = "0,0,1";
    double cos_threshold_deg = 30.0;
    stream_cmd->add_option("--in", in_path, "stream file")->required();
    stream_cmd->add_option("--registry", registry_path, "registry file")->required();
    stream_cmd->add_option("--window", window_s, "classification window after a trigger [s]")
        ->capture_default_str();
    stream_cmd->add_option("--palm-axis", palm_text, "sensor-frame palm axis x,y,z")
        ->capture_default_str();
    stream_cmd->add_option("--up-axis", up_text, "global up direction x,y,z")
        ->capture_default_str();
    stream_cmd->add_option("--up-cone-deg", cos_threshold_deg,
                           "palm-up acceptance cone half-angle [deg]")
        ->capture_default_str();
    stream_cmd->add_option("--min-duration", det.min_duration_s, "required palm-up hold [s]")
        ->capture_default_str();
    stream_cmd->add_option("--ref", ref_text, "reference quaternion w,x,y,z")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // help text, exit 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*generate) {
            synth.seed = seed;
            return cmd_generate(synth, out_dir);
        }
        if (*quantize_cmd) return cmd_quantize(in_path, out_path, grid_path, parse_quat_flag(ref_text));
        if (*train_prior)
            return cmd_train_prior(data_path, model_out, vb, seed, grid_path,
                                   parse_quat_flag(ref_text));
        if (*train_class)
            return cmd_train_class(label, data_path, prior_path, registry_path, model_out,
                                   vb_class, seed, grid_path, parse_quat_flag(ref_text));
        if (*classify_cmd) return cmd_classify(registry_path, in_path, parse_quat_flag(ref_text));
        if (*evaluate_cmd) {
            exp.seed = seed;
            exp.hidden_states = vb_eval.hidden;
            exp.vb = vb_eval.config(seed);
            exp.run_dtw = !no_dtw;
            if (policy_text == "learned") exp.prior_policy = ExperimentSpec::PriorPolicy::learned;
            if (policy_text == "uninformative")
                exp.prior_policy = ExperimentSpec::PriorPolicy::uninformative;
            return cmd_evaluate(data_path, exp, csv_path, grid_path, parse_quat_flag(ref_text));
        }
        if (*stream_cmd) {
            det.e_palm = parse_vec_flag(palm_text, "--palm-axis");
            det.up = parse_vec_flag(up_text, "--up-axis");
            det.cos_threshold = std::cos(cos_threshold_deg * 3.14159265358979323846 / 180.0);
            return cmd_stream(in_path, registry_path, window_s, det, parse_quat_flag(ref_text));
        }
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
