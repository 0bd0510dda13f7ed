#include "stairkit/cli.hpp"

#include "stairkit/bench.hpp"
#include "stairkit/error.hpp"
#include "stairkit/label_codec.hpp"
#include "stairkit/line_linker.hpp"
#include "stairkit/losses.hpp"
#include "stairkit/metrics.hpp"
#include "stairkit/reconstruct.hpp"
#include "stairkit/synth.hpp"
#include "text_util.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <ostream>
#include <random>

namespace stairkit::cli {

namespace {

namespace fs = std::filesystem;

struct SynthArgs {
    int steps = 3;
    std::string out;
    std::uint64_t seed = 0;
    bool random = false;
    std::size_t height = 512, width = 512;
    double background = 10.0;
};

struct GeometryArgs {
    std::size_t height = 512, width = 512, rows = 64, cols = 32;
    GridGeometry geometry() const {
        GridGeometry g{height, width, rows, cols};
        g.validate();
        return g;
    }
};

struct EncodeArgs {
    std::string lines, out;
    GeometryArgs geom;
};

struct DecodeArgs {
    std::string heat, loc, kind = "convex", out;
    double threshold = 0.75;
    GeometryArgs geom;
};

struct LinkArgs {
    std::string stem, heat_convex, loc_convex, heat_concave, loc_concave, out;
    double threshold = 0.75;
    std::size_t top_k = 50;
    double close_px = -1;
    GeometryArgs geom;
};

struct ReconstructArgs {
    std::string depth, mask, intrinsics, cls = "tread", out, rgb;
    std::size_t threads = 1;
    double dmin = 0.2, dmax = 10.0;
};

struct EvalArgs {
    std::string pred_stem, gt_stem, pred_seg, gt_seg, out;
    double conf = 0.5;
};

struct LossArgs {
    std::string pred_stem, gt_stem, pred_seg, gt_seg, pred_depth, gt_depth;
};

struct BenchArgs {
    std::string size = "640x480";
    std::size_t iters = 100, threads = 1;
    std::uint64_t seed = 0;
};

void add_geometry(CLI::App* app, GeometryArgs& g) {
    app->add_option("--height", g.height, "Network input height in pixels")->check(CLI::PositiveNumber);
    app->add_option("--width", g.width, "Network input width in pixels")->check(CLI::PositiveNumber);
    app->add_option("--rows", g.rows, "Heatmap grid rows")->check(CLI::PositiveNumber);
    app->add_option("--cols", g.cols, "Heatmap grid columns")->check(CLI::PositiveNumber);
}

void emit(std::ostream& out, const std::string& text, const std::string& path) {
    if (path.empty())
        out << text;
    else
        write_text_atomic(path, text);
}

LineKind require_kind(const std::string& text) {
    if (auto k = parse_line_kind(text)) return *k;
    throw CLI::ValidationError("--kind", "must be convex or concave");
}

int do_synth(const SynthArgs& a, std::ostream& out) {
    StairSpec spec;
    if (a.random) {
        std::mt19937_64 rng(a.seed);
        spec = sample_stair_spec(rng, a.steps, a.height, a.width);
    } else {
        spec = default_stair_spec(a.steps, a.height, a.width);
    }
    spec.background_depth = a.background;
    const SceneTruth truth = generate_scene(spec);
    write_scene(truth, a.out);

    const GridGeometry geom;
    if (a.height == geom.input_h && a.width == geom.input_w)
        write_labels(encode_lines(truth.lines, geom), fs::path(a.out) / "labels");
    out << fmt::format("convex = {}\nconcave = {}\n", truth.count(LineKind::Convex), truth.count(LineKind::Concave));
    return kOk;
}

int do_encode(const EncodeArgs& a, std::ostream& out) {
    const GridGeometry geom = a.geom.geometry();
    const auto lines = read_lines_csv(a.lines);
    const EncodedLabels labels = encode_lines(lines, geom);
    write_labels(labels, a.out);
    out << fmt::format("encoded {} lines into {}\n", lines.size(), a.out);
    return kOk;
}

int do_decode(const DecodeArgs& a, std::ostream& out) {
    const GridGeometry geom = a.geom.geometry();
    const LabelPair pair = read_label_pair(a.heat, a.loc, require_kind(a.kind));
    std::string csv = "kind,row,col,confidence,x1,y1,x2,y2\n";
    for (const auto& det : decode_cells(pair, a.threshold)) {
        const LineSegment s = cell_to_pixels(det, geom);
        csv += fmt::format("{},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", to_string(det.kind), det.row, det.col,
                           det.confidence, s.x1, s.y1, s.x2, s.y2);
    }
    emit(out, csv, a.out);
    return kOk;
}

int do_link(const LinkArgs& a, std::ostream& out, std::ostream& err) {
    const GridGeometry geom = a.geom.geometry();
    EncodedLabels labels;
    if (!a.stem.empty()) {
        labels = read_labels(a.stem);
    } else {
        if (a.heat_convex.empty() || a.loc_convex.empty() || a.heat_concave.empty() || a.loc_concave.empty())
            throw CLI::ValidationError("link", "give --stem or all four --heat-*/--loc-* files");
        labels = {read_label_pair(a.heat_convex, a.loc_convex, LineKind::Convex),
                  read_label_pair(a.heat_concave, a.loc_concave, LineKind::Concave)};
    }
    LinkerConfig cfg = LinkerConfig::for_geometry(geom);
    cfg.confidence_threshold = a.threshold;
    cfg.top_k = a.top_k;
    if (a.close_px >= 0) cfg.endpoint_close_px = a.close_px;
    const LinkedLines linked = link_lines(labels, cfg, geom);
    for (const auto* r : {&linked.convex, &linked.concave})
        for (const auto& w : r->warnings) err << "warning: " << w << '\n';
    emit(out, format_equations_csv(linked.all()), a.out);
    return kOk;
}

int do_reconstruct(const ReconstructArgs& a, std::ostream& out, std::ostream& err) {
    const auto cls = parse_surface_class(a.cls);
    if (!cls) throw CLI::ValidationError("--class", "must be riser, tread or background");
    const TensorGrid depth = read_tensor(a.depth);
    const TensorGrid mask = harden_mask(read_tensor(a.mask), a.threads);
    const CameraIntrinsics k = parse_intrinsics(detail::read_text(a.intrinsics));
    std::optional<TensorGrid> rgb;
    if (!a.rgb.empty()) rgb = read_tensor(a.rgb);

    const TensorGrid masked = class_depth(depth, mask, *cls, a.threads);
    const std::size_t outside = count_out_of_range(masked, {a.dmin, a.dmax});
    if (outside > 0)
        err << fmt::format("warning: {} depth values outside [{}, {}] m\n", outside, a.dmin, a.dmax);
    const PointCloud cloud = reconstruct_cloud(masked, mask, k, *cls, rgb ? &*rgb : nullptr, a.threads);
    write_ply(cloud, a.out);
    out << fmt::format("class = {}\npoints = {}\ndropped = {}\n", to_string(*cls), cloud.size(),
                       cloud.dropped_pixels);
    return kOk;
}

std::string fixed_or_nan(const std::optional<double>& v) { return v ? fmt::format("{:.6f}", *v) : "nan"; }

int do_eval(const EvalArgs& a, std::ostream& out) {
    if (a.pred_stem.empty() != a.gt_stem.empty())
        throw CLI::ValidationError("eval", "--pred-stem and --gt-stem go together");
    if (a.pred_seg.empty() != a.gt_seg.empty())
        throw CLI::ValidationError("eval", "--pred-seg and --gt-seg go together");
    if (a.pred_stem.empty() && a.pred_seg.empty())
        throw CLI::ValidationError("eval", "nothing to evaluate");

    LineScores lines;
    if (!a.pred_stem.empty()) {
        const EncodedLabels pred = read_labels(a.pred_stem);
        const EncodedLabels gt = read_labels(a.gt_stem);
        ConfusionCounts total;
        for (LineKind kind : {LineKind::Convex, LineKind::Concave}) {
            const auto c = cell_confusion(pred.of(kind).heatmap, gt.of(kind).heatmap, a.conf);
            total.tp += c.tp;
            total.fp += c.fp;
            total.fn += c.fn;
            total.tn += c.tn;
        }
        lines = precision_recall_iou(total);
    }
    std::optional<PixelScores> pixels;
    if (!a.pred_seg.empty())
        pixels = pixel_accuracy(harden_mask(read_tensor(a.pred_seg)), harden_mask(read_tensor(a.gt_seg)));

    out << "precision recall iou pa mpa\n";
    out << fmt::format("{} {} {} {} {}\n", fixed_or_nan(lines.precision), fixed_or_nan(lines.recall),
                       fixed_or_nan(lines.iou), fixed_or_nan(pixels ? std::optional(pixels->pa) : std::nullopt),
                       fixed_or_nan(pixels ? std::optional(pixels->mpa) : std::nullopt));
    if (!a.out.empty()) write_text_atomic(a.out, format_metrics(lines, pixels));
    return kOk;
}

std::vector<double> as_doubles(const TensorGrid& g) { return {g.data().begin(), g.data().end()}; }

int do_loss(const LossArgs& a, std::ostream& out) {
    if (a.pred_seg.empty() != a.gt_seg.empty())
        throw CLI::ValidationError("loss", "--pred-seg and --gt-seg go together");
    if (a.pred_depth.empty() != a.gt_depth.empty())
        throw CLI::ValidationError("loss", "--pred-depth and --gt-depth go together");
    const LossConfig cfg;
    const EncodedLabels pred = read_labels(a.pred_stem);
    const EncodedLabels gt = read_labels(a.gt_stem);
    auto line_term = [&](LineKind kind) {
        return line_loss(LineLossInput::from_grids(pred.of(kind).heatmap, pred.of(kind).locations,
                                                   gt.of(kind).heatmap, gt.of(kind).locations),
                         cfg);
    };
    double seg = 0, depth = 0;
    if (!a.pred_seg.empty()) {
        const TensorGrid p = read_tensor(a.pred_seg), g = read_tensor(a.gt_seg);
        if (!p.same_shape(g)) throw DimensionError("segmentation prediction and ground truth differ in shape");
        seg = seg_loss(as_doubles(p), as_doubles(g)).value;
    }
    if (!a.pred_depth.empty()) {
        const TensorGrid p = read_tensor(a.pred_depth), g = read_tensor(a.gt_depth);
        if (!p.same_shape(g)) throw DimensionError("depth prediction and ground truth differ in shape");
        depth = depth_loss(as_doubles(p), as_doubles(g), cfg);
    }
    const LossBreakdown b = combine_losses(line_term(LineKind::Convex), line_term(LineKind::Concave), seg, depth);
    out << fmt::format("{:<14} {}\n", "term", "value");
    out << fmt::format("{:<14} {:.6f}\n", "convex_line", b.convex_line);
    out << fmt::format("{:<14} {:.6f}\n", "concave_line", b.concave_line);
    out << fmt::format("{:<14} {:.6f}\n", "seg", b.seg);
    out << fmt::format("{:<14} {:.6f}\n", "depth", b.depth);
    out << fmt::format("{:<14} {:.6f}\n", "total", b.total);
    return kOk;
}

int do_bench(const BenchArgs& a, std::ostream& out) {
    BenchConfig cfg;
    const auto parts = detail::split(a.size, 'x');
    if (parts.size() != 2) throw CLI::ValidationError("--size", "expected WIDTHxHEIGHT");
    cfg.width = static_cast<std::size_t>(detail::parse_double(parts[0], "width"));
    cfg.height = static_cast<std::size_t>(detail::parse_double(parts[1], "height"));
    if (cfg.width == 0 || cfg.height == 0) throw CLI::ValidationError("--size", "extents must be positive");
    cfg.iters = a.iters;
    cfg.threads = a.threads;
    cfg.seed = a.seed;
    out << format_bench(bench_pipeline(cfg));
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Stair line and surface geometry toolkit", "stairkit"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "Render a synthetic staircase scene");
    s->add_option("--steps", synth.steps, "Number of steps")->check(CLI::Range(1, 126));
    s->add_option("--out", synth.out, "Output scene directory")->required();
    s->add_option("--seed", synth.seed, "Seed for --random");
    s->add_flag("--random", synth.random, "Sample a random camera pose");
    s->add_option("--height", synth.height, "Image height")->check(CLI::PositiveNumber);
    s->add_option("--width", synth.width, "Image width")->check(CLI::PositiveNumber);
    s->add_option("--background-depth", synth.background, "Far wall depth in metres")->check(CLI::PositiveNumber);

    EncodeArgs encode;
    auto* e = app.add_subcommand("encode", "Encode ground-truth lines into heatmap and location grids");
    e->add_option("--lines", encode.lines, "Lines CSV")->required()->check(CLI::ExistingFile);
    e->add_option("--out", encode.out, "Output stem")->required();
    add_geometry(e, encode.geom);

    DecodeArgs decode;
    auto* d = app.add_subcommand("decode", "List cells above a confidence threshold");
    d->add_option("--heat", decode.heat, "Heatmap STN3")->required()->check(CLI::ExistingFile);
    d->add_option("--loc", decode.loc, "Location STN3")->required()->check(CLI::ExistingFile);
    d->add_option("--kind", decode.kind, "convex or concave");
    d->add_option("--threshold", decode.threshold, "Confidence threshold")->check(CLI::Range(0.0, 1.0));
    d->add_option("--out", decode.out, "Output CSV (default stdout)");
    add_geometry(d, decode.geom);

    LinkArgs link;
    auto* l = app.add_subcommand("link", "Link cells into stair line equations");
    l->add_option("--stem", link.stem, "Label stem (<stem>.heat.<kind>.stn3, <stem>.loc.<kind>.stn3)");
    l->add_option("--heat-convex", link.heat_convex, "Convex heatmap STN3");
    l->add_option("--loc-convex", link.loc_convex, "Convex location STN3");
    l->add_option("--heat-concave", link.heat_concave, "Concave heatmap STN3");
    l->add_option("--loc-concave", link.loc_concave, "Concave location STN3");
    l->add_option("--threshold", link.threshold, "Confidence threshold")->check(CLI::Range(0.0, 1.0));
    l->add_option("--topk", link.top_k, "Cells kept after thresholding")->check(CLI::Range(2, 100000));
    l->add_option("--close-px", link.close_px, "Endpoint closeness in pixels (default 2 * stride_h)");
    l->add_option("--out", link.out, "Output CSV (default stdout)");
    add_geometry(l, link.geom);

    ReconstructArgs rec;
    auto* r = app.add_subcommand("reconstruct", "Back-project one surface class into a PLY point cloud");
    r->add_option("--depth", rec.depth, "Depth STN3 (metres)")->required()->check(CLI::ExistingFile);
    r->add_option("--mask", rec.mask, "Segmentation STN3, channels background/riser/tread")
        ->required()
        ->check(CLI::ExistingFile);
    r->add_option("--intrinsics", rec.intrinsics, "Intrinsics text (9 values)")->required()->check(CLI::ExistingFile);
    r->add_option("--class", rec.cls, "riser, tread or background");
    r->add_option("--out", rec.out, "Output PLY")->required();
    r->add_option("--rgb", rec.rgb, "Aligned RGB STN3 for point colours")->check(CLI::ExistingFile);
    r->add_option("--threads", rec.threads, "Row-band threads")->check(CLI::Range(1, 256));
    r->add_option("--dmin", rec.dmin, "Lower depth bound for warnings")->check(CLI::NonNegativeNumber);
    r->add_option("--dmax", rec.dmax, "Upper depth bound for warnings")->check(CLI::PositiveNumber);

    EvalArgs ev;
    auto* v = app.add_subcommand("eval", "Cell precision/recall/IOU and segmentation PA/MPA");
    v->add_option("--pred-stem", ev.pred_stem, "Predicted label stem");
    v->add_option("--gt-stem", ev.gt_stem, "Ground-truth label stem");
    v->add_option("--pred-seg", ev.pred_seg, "Predicted segmentation STN3")->check(CLI::ExistingFile);
    v->add_option("--gt-seg", ev.gt_seg, "Ground-truth segmentation STN3")->check(CLI::ExistingFile);
    v->add_option("--conf", ev.conf, "Cell confidence level")->check(CLI::Range(0.0, 1.0));
    v->add_option("--out", ev.out, "metrics.txt output");

    LossArgs loss;
    auto* o = app.add_subcommand("loss", "Evaluate the training losses on stored predictions");
    o->add_option("--pred-stem", loss.pred_stem, "Predicted label stem")->required();
    o->add_option("--gt-stem", loss.gt_stem, "Ground-truth label stem")->required();
    o->add_option("--pred-seg", loss.pred_seg, "Predicted class probabilities STN3")->check(CLI::ExistingFile);
    o->add_option("--gt-seg", loss.gt_seg, "One-hot ground truth STN3")->check(CLI::ExistingFile);
    o->add_option("--pred-depth", loss.pred_depth, "Predicted normalized depth STN3")->check(CLI::ExistingFile);
    o->add_option("--gt-depth", loss.gt_depth, "Ground-truth normalized depth STN3")->check(CLI::ExistingFile);

    BenchArgs bench;
    auto* b = app.add_subcommand("bench", "Time the post-processing and reconstruction pipeline");
    b->add_option("--size", bench.size, "WIDTHxHEIGHT of the depth/mask inputs");
    b->add_option("--iters", bench.iters, "Iterations")->check(CLI::Range(10, 1000000));
    b->add_option("--threads", bench.threads, "Row-band threads")->check(CLI::Range(1, 256));
    b->add_option("--seed", bench.seed, "Input seed");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
        if (s->parsed()) return do_synth(synth, out);
        if (e->parsed()) return do_encode(encode, out);
        if (d->parsed()) return do_decode(decode, out);
        if (l->parsed()) return do_link(link, out, err);
        if (r->parsed()) return do_reconstruct(rec, out, err);
        if (v->parsed()) return do_eval(ev, out);
        if (o->parsed()) return do_loss(loss, out);
        if (b->parsed()) return do_bench(bench, out);
        return kUsageError;
    } catch (const CLI::CallForHelp& ex) {
        app.exit(ex, out, err);
        return kOk;
    } catch (const CLI::CallForAllHelp& ex) {
        app.exit(ex, out, err);
        return kOk;
    } catch (const CLI::CallForVersion& ex) {
        app.exit(ex, out, err);
        return kOk;
    } catch (const CLI::Error& ex) {
        err << "error: " << ex.what() << "\n\n" << app.help();
        return kUsageError;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << '\n';
        return kDomainError;
    }
}

}  // namespace stairkit::cli
