// Command-line front end: synthetic matrix generation, quantization round
// trips, overhead simulation, uniformity testing, and inference probes.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "icq/bounds.hpp"
#include "icq/container.hpp"
#include "icq/errors.hpp"
#include "icq/gapcodec.hpp"
#include "icq/infer.hpp"
#include "icq/matrix.hpp"
#include "icq/parallel.hpp"
#include "icq/partition.hpp"
#include "icq/quantizers.hpp"
#include "icq/rng.hpp"
#include "icq/stats.hpp"

using nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// Every CSV starts with the RNG provenance so a run can be reproduced.
void csv_preamble(std::ostream& out, uint64_t seed) {
    out << "# rng=" << icq::SplitMix64::algorithm_id << " seed=" << seed << "\n";
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw icq::io_error("cannot open " + path + " for writing");
    return out;
}

void emit_report(const ordered_json& j, const std::string& report_path) {
    if (report_path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        auto out = open_out(report_path);
        out << j.dump(2) << "\n";
        if (!out) throw icq::io_error("failed writing " + report_path);
    }
}

int parse_gap_width(const std::string& s, double gamma) {
    if (s == "auto") return icq::auto_bit_width(gamma);
    int b = 0;
    try {
        size_t used = 0;
        b = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
        throw icq::validation_error("--gapwidth expects an integer or 'auto'");
    }
    if (b < icq::min_gap_bits || b > icq::max_gap_bits)
        throw icq::validation_error("--gapwidth must lie in [2, 15] or be 'auto'");
    return b;
}

icq::WeightMatrix generate(uint32_t rows, uint32_t cols, const std::string& dist,
                           uint64_t seed, double scale) {
    icq::WeightMatrix m = icq::WeightMatrix::zeros(rows, cols);
    icq::parallel_for(rows, [&](size_t begin, size_t end) {
        for (size_t r = begin; r < end; ++r) {
            icq::SplitMix64 rng(icq::derive_seed(seed, r));
            auto row = m.row(static_cast<uint32_t>(r));
            for (uint32_t c = 0; c < cols; ++c) {
                double v;
                if (dist == "gaussian")
                    v = rng.next_gaussian();
                else if (dist == "student5")
                    v = rng.next_student_t(5);
                else if (dist == "uniform")
                    v = 2.0 * rng.next_unit() - 1.0;
                else
                    throw icq::validation_error("unknown distribution " + dist);
                row[c] = static_cast<float>(v * scale);
            }
        }
    });
    return m;
}

// ---------------------------------------------------------------------------

struct GenOpts {
    uint32_t rows = 128, cols = 4096;
    std::string dist = "gaussian";
    uint64_t seed = 0;
    double scale = 1.0;
    std::string out;
};

void run_gen(const GenOpts& o) {
    icq::WeightMatrix m = generate(o.rows, o.cols, o.dist, o.seed, o.scale);
    uint64_t bytes = icq::save_raw_file(m, o.out);
    ordered_json j;
    j["command"] = "gen";
    j["rows"] = o.rows;
    j["cols"] = o.cols;
    j["dist"] = o.dist;
    j["scale"] = o.scale;
    j["rng"] = icq::SplitMix64::algorithm_id;
    j["seed"] = o.seed;
    j["output"] = o.out;
    j["bytes"] = bytes;
    std::cout << j.dump(2) << "\n";
}

struct QuantizeOpts {
    std::string in, out, weights, report;
    double gamma = 0.05;
    int bits = 3;
    std::string scheme = "rtn";
    std::string gapwidth = "auto";
    uint32_t block = 0;
    uint64_t seed = 0;
};

void run_quantize(const QuantizeOpts& o) {
    icq::WeightMatrix m = icq::load_raw_file(o.in);
    std::optional<icq::WeightMatrix> weights;
    if (!o.weights.empty()) weights = icq::load_raw_file(o.weights);

    icq::QuantizeConfig cfg;
    cfg.gamma = o.gamma;
    cfg.bits = o.bits;
    cfg.scheme = o.scheme == "sk" ? icq::Scheme::sk : icq::Scheme::rtn;
    if (o.scheme != "rtn" && o.scheme != "sk")
        throw icq::validation_error("--scheme must be rtn or sk");
    cfg.gap_bits = parse_gap_width(o.gapwidth, o.gamma);
    cfg.mode = o.block == 0 ? icq::GapMode::whole_row : icq::GapMode::blockwise;
    cfg.block_size = o.block;
    cfg.seed = o.seed;

    icq::QuantizedTensor t =
        icq::quantize_matrix(m, cfg, weights ? &*weights : nullptr);
    uint64_t bytes = icq::save_quantized_file(t, o.out);

    icq::WeightMatrix recon = icq::dequantize_matrix(t);
    double mse = 0.0, max_err = 0.0, weighted_obj = 0.0;
    for (size_t i = 0; i < m.values.size(); ++i) {
        double e = static_cast<double>(m.values[i]) - recon.values[i];
        mse += e * e;
        max_err = std::max(max_err, std::fabs(e));
        if (weights) weighted_obj += static_cast<double>(weights->values[i]) * e * e;
    }
    mse /= static_cast<double>(m.values.size());

    double overhead_sum = 0.0;
    for (const auto& rq : t.rows)
        overhead_sum += icq::measured_overhead(rq.gaps, t.d_in);
    double overhead_mean = overhead_sum / t.d_out;

    icq::StorageBreakdown sb = icq::storage_accounting(t);

    ordered_json j;
    j["command"] = "quantize";
    j["input"] = o.in;
    j["output"] = o.out;
    j["d_out"] = t.d_out;
    j["d_in"] = t.d_in;
    ordered_json jc;
    jc["gamma"] = t.gamma;
    jc["bits"] = t.bits;
    jc["scheme"] = o.scheme;
    jc["gap_bits"] = t.gap_bits;
    jc["gap_bits_auto"] = o.gapwidth == "auto";
    jc["mode"] = t.mode == icq::GapMode::whole_row ? "whole-row" : "blockwise";
    jc["block_size"] = t.block_size;
    jc["outliers_per_row"] = t.outliers_per_row;
    jc["rng"] = icq::SplitMix64::algorithm_id;
    jc["seed"] = o.seed;
    j["config"] = jc;
    j["mse"] = mse;
    j["max_abs_error"] = max_err;
    if (weights) j["weighted_objective"] = weighted_obj;
    ordered_json jb;
    jb["code"] = sb.code_bits;
    jb["index"] = sb.index_bits;
    jb["codebook"] = sb.codebook_bits;
    jb["framing"] = sb.framing_bits;
    jb["total"] = sb.total();
    jb["file_bytes"] = bytes;
    j["bits_per_weight"] = jb;
    ordered_json jo;
    jo["measured_mean"] = overhead_mean;
    jo["expected_uniform"] = icq::lemma1_bound(std::max(t.gamma, 1e-9), t.gap_bits);
    jo["worst_case"] =
        icq::lemma2_bound(std::max(t.gamma, 1e-9), t.gap_bits, t.d_in);
    j["index_overhead"] = jo;
    emit_report(j, o.report);
}

struct DequantizeOpts {
    std::string in, out;
};

void run_dequantize(const DequantizeOpts& o) {
    icq::QuantizedTensor t = icq::load_quantized_file(o.in);
    icq::WeightMatrix m = icq::dequantize_matrix(t);
    uint64_t bytes = icq::save_raw_file(m, o.out);
    ordered_json j;
    j["command"] = "dequantize";
    j["input"] = o.in;
    j["output"] = o.out;
    j["d_out"] = t.d_out;
    j["d_in"] = t.d_in;
    j["bytes"] = bytes;
    std::cout << j.dump(2) << "\n";
}

struct MatvecOpts {
    std::string in, vec, out;
    std::string path = "fused";
};

void run_matvec(const MatvecOpts& o) {
    icq::QuantizedTensor t = icq::load_quantized_file(o.in);
    icq::WeightMatrix xm = icq::load_raw_file(o.vec);
    if (xm.rows != 1 && xm.cols != 1)
        throw icq::validation_error("--vec file must be a 1xN or Nx1 matrix");
    std::span<const float> x(xm.values);

    std::vector<double> y;
    if (o.path == "fused") {
        y = icq::matvec_fused(t, x);
    } else if (o.path == "predecoded") {
        y = icq::matvec_predecoded(t, x);
    } else if (o.path == "dense") {
        y = icq::matvec_dense_reference(icq::dequantize_matrix(t), x);
    } else {
        throw icq::validation_error("--path must be fused, predecoded, or dense");
    }

    icq::WeightMatrix ym = icq::WeightMatrix::zeros(1, t.d_out);
    for (uint32_t i = 0; i < t.d_out; ++i)
        ym.values[i] = static_cast<float>(y[i]);
    uint64_t bytes = icq::save_raw_file(ym, o.out);
    ordered_json j;
    j["command"] = "matvec";
    j["input"] = o.in;
    j["vector"] = o.vec;
    j["output"] = o.out;
    j["path"] = o.path;
    j["d_out"] = t.d_out;
    j["bytes"] = bytes;
    std::cout << j.dump(2) << "\n";
}

struct SimulateOpts {
    uint32_t cols = 4096;
    double gamma = 0.05;
    std::string gapwidth = "auto";
    uint32_t trials = 1000;
    uint64_t seed = 0;
    std::string model = "uniform";
    std::string out;
};

void run_simulate(const SimulateOpts& o) {
    std::vector<int> widths;
    std::stringstream ss(o.gapwidth);
    std::string piece;
    while (std::getline(ss, piece, ','))
        widths.push_back(parse_gap_width(piece, o.gamma));
    if (widths.empty())
        throw icq::validation_error("--gapwidth must name at least one width");

    std::vector<icq::PositionModel> models;
    if (o.model == "all") {
        models = {icq::PositionModel::uniform, icq::PositionModel::worst_case,
                  icq::PositionModel::clustered};
    } else if (o.model == "uniform") {
        models = {icq::PositionModel::uniform};
    } else if (o.model == "worst") {
        models = {icq::PositionModel::worst_case};
    } else if (o.model == "clustered") {
        models = {icq::PositionModel::clustered};
    } else {
        throw icq::validation_error("--model must be uniform, worst, clustered, or all");
    }

    std::ostringstream csv;
    csv_preamble(csv, o.seed);
    csv << "model,d_in,gamma,gap_bits,trials,mean,stddev,ci_low,ci_high,min,max,"
           "expected_uniform,worst_case_bound\n";
    for (icq::PositionModel model : models) {
        for (int b : widths) {
            icq::OverheadSummary s = icq::simulate_overhead(o.cols, o.gamma, b,
                                                            o.trials, o.seed, model);
            csv << icq::position_model_name(model) << ',' << o.cols << ','
                << fmt(o.gamma) << ',' << b << ',' << s.trials << ','
                << fmt(s.mean) << ',' << fmt(s.stddev) << ',' << fmt(s.ci_low)
                << ',' << fmt(s.ci_high) << ',' << fmt(s.min) << ',' << fmt(s.max)
                << ',' << fmt(s.lemma1) << ',' << fmt(s.lemma2) << '\n';
        }
    }
    if (o.out.empty()) {
        std::cout << csv.str();
    } else {
        auto f = open_out(o.out);
        f << csv.str();
        if (!f) throw icq::io_error("failed writing " + o.out);
    }
}

struct Chi2Opts {
    std::string in, out;
    double gamma = 0.05;
    uint32_t group_size = 256;
    double significance = 0.05;
};

void run_chi2(const Chi2Opts& o) {
    icq::WeightMatrix m = icq::load_raw_file(o.in);
    icq::ChiSquareReport rep =
        icq::chi_square_uniformity(m, o.gamma, o.group_size, o.significance);
    if (!o.out.empty()) {
        auto f = open_out(o.out);
        f << "# rows=" << m.rows << " gamma=" << fmt(o.gamma) << "\n";
        f << "row,statistic,rejected\n";
        for (size_t r = 0; r < rep.statistic.size(); ++r)
            f << r << ',' << fmt(rep.statistic[r]) << ','
              << static_cast<int>(rep.rejected[r]) << '\n';
        if (!f) throw icq::io_error("failed writing " + o.out);
    }
    ordered_json j;
    j["command"] = "chi2";
    j["input"] = o.in;
    j["rows"] = m.rows;
    j["gamma"] = o.gamma;
    j["group_size"] = rep.group_size;
    j["groups"] = rep.groups;
    j["df"] = rep.df;
    j["significance"] = rep.significance;
    j["critical_value"] = rep.critical_value;
    j["expected_per_group"] = rep.expected_per_group;
    j["underpowered"] = rep.underpowered;
    j["rejection_rate"] = rep.rejection_rate;
    std::cout << j.dump(2) << "\n";
}

struct AnalyzeOpts {
    std::string in, out;
};

void run_analyze(const AnalyzeOpts& o) {
    icq::WeightMatrix m = icq::load_raw_file(o.in);
    std::ostringstream csv;
    csv << "# rows=" << m.rows << " cols=" << m.cols << "\n";
    csv << "gamma,outliers_per_row,auto_gap_bits,mean_norm_inlier_range,"
           "min_norm_inlier_range,max_norm_inlier_range,mean_index_overhead\n";
    for (int pct = 1; pct <= 10; ++pct) {
        double gamma = pct / 100.0;
        uint32_t p = static_cast<uint32_t>(
            std::floor(gamma * static_cast<double>(m.cols)));
        int b = icq::auto_bit_width(gamma);
        double sum = 0.0, lo = 1.0, hi = 0.0, osum = 0.0;
        for (uint32_t r = 0; r < m.rows; ++r) {
            auto part = icq::partition_row(m.row(r), gamma);
            auto rep = icq::range_report(part, m.row(r));
            sum += rep.normalized_inlier_range;
            lo = std::min(lo, rep.normalized_inlier_range);
            hi = std::max(hi, rep.normalized_inlier_range);
            auto code = icq::encode_gaps(part.outlier_indices, m.cols, b);
            osum += icq::measured_overhead(code, m.cols);
        }
        csv << fmt(gamma) << ',' << p << ',' << b << ',' << fmt(sum / m.rows)
            << ',' << fmt(lo) << ',' << fmt(hi) << ',' << fmt(osum / m.rows)
            << '\n';
    }
    if (o.out.empty()) {
        std::cout << csv.str();
    } else {
        auto f = open_out(o.out);
        f << csv.str();
        if (!f) throw icq::io_error("failed writing " + o.out);
    }
}

struct BenchOpts {
    std::string in;
    uint32_t reps = 20;
    uint64_t seed = 0;
};

void run_bench(const BenchOpts& o) {
    icq::QuantizedTensor t = icq::load_quantized_file(o.in);
    icq::SplitMix64 rng(o.seed);
    std::vector<float> x(t.d_in);
    for (float& v : x) v = static_cast<float>(rng.next_gaussian());

    auto fused = icq::matvec_fused(t, x);
    auto pre = icq::matvec_predecoded(t, x);
    auto dense = icq::matvec_dense_reference(icq::dequantize_matrix(t), x);
    bool equal = fused == pre && fused == dense;

    icq::ThroughputReport rep = icq::throughput_probe(t, x, o.reps);
    ordered_json j;
    j["command"] = "bench";
    j["input"] = o.in;
    j["d_out"] = t.d_out;
    j["d_in"] = t.d_in;
    j["rng"] = icq::SplitMix64::algorithm_id;
    j["seed"] = o.seed;
    j["repetitions"] = rep.repetitions;
    j["paths_bitwise_equal"] = equal;
    j["fused_s"] = {{"median", rep.fused_median_s}, {"min", rep.fused_min_s}};
    j["predecoded_s"] = {{"median", rep.predecoded_median_s},
                         {"min", rep.predecoded_min_s}};
    j["dense_s"] = {{"median", rep.dense_median_s}, {"min", rep.dense_min_s}};
    j["quantized_bytes"] = rep.quantized_bytes;
    j["dense_bytes"] = rep.dense_bytes;
    j["compression_ratio"] =
        static_cast<double>(rep.dense_bytes) / rep.quantized_bytes;
    std::cout << j.dump(2) << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"outlier-aware weight quantization toolkit"};
    app.require_subcommand(1);

    GenOpts gen;
    auto* cgen = app.add_subcommand("gen", "generate a synthetic raw matrix");
    cgen->add_option("--rows", gen.rows, "output rows")->required();
    cgen->add_option("--cols", gen.cols, "output columns")->required();
    cgen->add_option("--dist", gen.dist, "gaussian | student5 | uniform");
    cgen->add_option("--seed", gen.seed, "rng seed");
    cgen->add_option("--scale", gen.scale, "value scale factor");
    cgen->add_option("--out", gen.out, "output raw matrix file")->required();
    cgen->callback([&] { run_gen(gen); });

    QuantizeOpts q;
    auto* cq = app.add_subcommand("quantize", "quantize a raw matrix");
    cq->add_option("--in", q.in, "input raw matrix")->required();
    cq->add_option("--out", q.out, "output quantized tensor")->required();
    cq->add_option("--gamma", q.gamma, "outlier fraction");
    cq->add_option("--bits", q.bits, "code width");
    cq->add_option("--scheme", q.scheme, "rtn | sk");
    cq->add_option("--gapwidth", q.gapwidth, "gap token bits or 'auto'");
    cq->add_option("--block", q.block, "block size (0 = whole row)");
    cq->add_option("--seed", q.seed, "rng seed (sk scheme)");
    cq->add_option("--weights", q.weights, "sensitivity weights (raw matrix)");
    cq->add_option("--report", q.report, "write the JSON report here instead of stdout");
    cq->callback([&] { run_quantize(q); });

    DequantizeOpts d;
    auto* cd = app.add_subcommand("dequantize", "reconstruct a raw matrix");
    cd->add_option("--in", d.in, "input quantized tensor")->required();
    cd->add_option("--out", d.out, "output raw matrix")->required();
    cd->callback([&] { run_dequantize(d); });

    MatvecOpts mv;
    auto* cmv = app.add_subcommand("matvec", "multiply a quantized tensor by a vector");
    cmv->add_option("--in", mv.in, "input quantized tensor")->required();
    cmv->add_option("--vec", mv.vec, "input vector (raw matrix, one row or column)")
        ->required();
    cmv->add_option("--out", mv.out, "output vector (raw matrix)")->required();
    cmv->add_option("--path", mv.path, "fused | predecoded | dense");
    cmv->callback([&] { run_matvec(mv); });

    SimulateOpts sim;
    auto* csim = app.add_subcommand("simulate", "Monte-Carlo index overhead");
    csim->add_option("--cols", sim.cols, "row length");
    csim->add_option("--gamma", sim.gamma, "outlier fraction");
    csim->add_option("--gapwidth", sim.gapwidth,
                     "gap bits, comma list, or 'auto'");
    csim->add_option("--trials", sim.trials, "trials per configuration");
    csim->add_option("--seed", sim.seed, "rng seed");
    csim->add_option("--model", sim.model, "uniform | worst | clustered | all");
    csim->add_option("--out", sim.out, "CSV output path (default stdout)");
    csim->callback([&] { run_simulate(sim); });

    Chi2Opts chi;
    auto* cchi = app.add_subcommand("chi2", "positional uniformity test");
    cchi->add_option("--in", chi.in, "input raw matrix")->required();
    cchi->add_option("--gamma", chi.gamma, "outlier fraction");
    cchi->add_option("--group-size", chi.group_size, "columns per group");
    cchi->add_option("--significance", chi.significance, "test significance");
    cchi->add_option("--out", chi.out, "per-row CSV output path");
    cchi->callback([&] { run_chi2(chi); });

    AnalyzeOpts an;
    auto* can = app.add_subcommand("analyze", "partition statistics across gamma");
    can->add_option("--in", an.in, "input raw matrix")->required();
    can->add_option("--out", an.out, "CSV output path (default stdout)");
    can->callback([&] { run_analyze(an); });

    BenchOpts bench;
    auto* cb = app.add_subcommand("bench", "matvec throughput probe");
    cb->add_option("--in", bench.in, "input quantized tensor")->required();
    cb->add_option("--reps", bench.reps, "repetitions per path");
    cb->add_option("--seed", bench.seed, "rng seed for the input vector");
    cb->callback([&] { run_bench(bench); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const icq::validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const icq::parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const icq::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
