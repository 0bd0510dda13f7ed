#include "oracles.hpp"

#include "stairkit/error.hpp"
#include "stairkit/label_codec.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

namespace stairkit {
namespace {

const GridGeometry kGeom;

LineSegment random_segment(std::mt19937& rng, LineKind kind = LineKind::Convex) {
    std::uniform_real_distribution<double> u(0.0, 511.9);
    for (;;) {
        LineSegment s{kind, u(rng), u(rng), u(rng), u(rng), 1.0};
        if (s.length() >= 1.0) return s.ordered();
    }
}

TEST(Gaussian, ReferenceValues) {
    const LineSegment l{LineKind::Convex, 0, 0, 100, 0, 1};
    EXPECT_NEAR(gaussian_response(50, 0, l), std::exp(-0.5), 1e-12);
    EXPECT_NEAR(gaussian_response(50, 0, l), 0.6065, 1e-4);
    EXPECT_EQ(gaussian_response(0, 0, l), 1.0);
    EXPECT_NEAR(gaussian_response(25, 0, l), std::exp(-0.125), 1e-12);
    EXPECT_NEAR(gaussian_response(25, 0, l), 0.8825, 1e-4);
}

TEST(Gaussian, MidpointAndSymmetryOnRandomSegments) {
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> t(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const LineSegment s = random_segment(rng);
        EXPECT_NEAR(gaussian_response(0.5 * (s.x1 + s.x2), 0.5 * (s.y1 + s.y2), s), std::exp(-0.5), 1e-9);
        const double a = t(rng);
        const double fwd = gaussian_response(s.x1 + a * (s.x2 - s.x1), s.y1 + a * (s.y2 - s.y1), s);
        const double rev = gaussian_response(s.x2 + a * (s.x1 - s.x2), s.y2 + a * (s.y1 - s.y2), s);
        EXPECT_NEAR(fwd, rev, 1e-12);
        EXPECT_GE(fwd, std::exp(-0.5) - 1e-12);
        EXPECT_LE(fwd, 1.0);
    }
}

TEST(Gaussian, ZeroLengthThrows) {
    EXPECT_THROW(gaussian_response(0, 0, LineSegment{LineKind::Convex, 3, 3, 3, 3, 1}), DegenerateError);
}

TEST(PixelToCell, Examples) {
    const auto a = pixel_to_cell(100, 200, kGeom);
    EXPECT_EQ(a.row, 25u);
    EXPECT_EQ(a.col, 6u);
    const auto b = pixel_to_cell(0, 0, kGeom);
    EXPECT_EQ(b.row, 0u);
    EXPECT_EQ(b.col, 0u);
    const auto c = pixel_to_cell(511, 511, kGeom);
    EXPECT_EQ(c.row, 63u);
    EXPECT_EQ(c.col, 31u);
    EXPECT_THROW(pixel_to_cell(512, 0, kGeom), BoundsError);
    EXPECT_THROW(pixel_to_cell(-0.1, 0, kGeom), BoundsError);
}

TEST(Encode, EmptyInputGivesZeroLabels) {
    const auto labels = encode_lines({}, kGeom);
    for (const LabelPair* p : {&labels.convex, &labels.concave}) {
        EXPECT_EQ(p->heatmap.dims(), (std::vector<std::size_t>{64, 32, 1}));
        EXPECT_EQ(p->locations.dims(), (std::vector<std::size_t>{64, 32, 4}));
        for (float v : p->heatmap.data()) EXPECT_EQ(v, 0.0f);
        for (float v : p->locations.data()) EXPECT_EQ(v, 0.0f);
    }
}

TEST(Encode, HorizontalLineFillsOneRow) {
    const std::vector<LineSegment> lines{{LineKind::Convex, 0, 100, 511, 100, 1}};
    const auto labels = encode_lines(lines, kGeom);
    std::size_t nonzero = 0;
    for (std::size_t r = 0; r < 64; ++r)
        for (std::size_t c = 0; c < 32; ++c)
            if (labels.convex.heatmap.at(r, c) > 0) {
                ++nonzero;
                EXPECT_EQ(r, 12u);
            }
    EXPECT_EQ(nonzero, 32u);
    EXPECT_EQ(labels.convex.heatmap.at(12, 0), 1.0f);
    EXPECT_EQ(labels.convex.heatmap.at(12, 31), 1.0f);
    // Midpoint cell sits at the heatmap minimum, which stays above 0.5.
    EXPECT_GE(labels.convex.heatmap.at(12, 15), std::exp(-0.5) - 1e-6);
    for (float v : labels.concave.heatmap.data()) EXPECT_EQ(v, 0.0f);
}

TEST(Encode, InteriorCellMatchesAnalyticClip) {
    const LineSegment line{LineKind::Concave, 100, 97, 400, 102, 1};
    const auto labels = encode_lines(std::vector<LineSegment>{line}, kGeom);
    const auto clip = oracle::clip_line_to_cell(line, 12, 15, 16, 8);
    ASSERT_TRUE(clip.has_value());
    const auto& loc = labels.concave.locations;
    EXPECT_NEAR(loc.at(12, 15, 0), 0.0, 1e-6);
    EXPECT_NEAR(loc.at(12, 15, 1), (clip->first.y - 96.0) / 8.0, 1e-6);
    EXPECT_NEAR(loc.at(12, 15, 2), 1.0, 1e-6);
    EXPECT_NEAR(loc.at(12, 15, 3), (clip->second.y - 96.0) / 8.0, 1e-6);
}

TEST(Encode, TraversedCellsMatchAnalyticClipOracle) {
    // Every cell whose closed box meets the segment in a piece of positive length is traversed.
    std::mt19937 rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        LineSegment s = random_segment(rng);
        if (std::abs(s.x2 - s.x1) < 1.0) continue;
        const auto cells = traverse_cells(s, kGeom);
        for (std::size_t r = 0; r < 64; ++r)
            for (std::size_t c = 0; c < 32; ++c) {
                const auto clip = oracle::clip_line_to_cell(s, r, c, 16, 8);
                if (!clip || std::hypot(clip->second.x - clip->first.x, clip->second.y - clip->first.y) < 1e-6)
                    continue;
                const auto it = std::find_if(cells.begin(), cells.end(), [&](const CellTraversal& t) {
                    return t.cell.row == r && t.cell.col == c;
                });
                ASSERT_NE(it, cells.end()) << "trial " << trial << " cell " << r << "," << c;
                EXPECT_NEAR(it->clipped.x1, clip->first.x, 1e-6);
                EXPECT_NEAR(it->clipped.y1, clip->first.y, 1e-6);
                EXPECT_NEAR(it->clipped.x2, clip->second.x, 1e-6);
                EXPECT_NEAR(it->clipped.y2, clip->second.y, 1e-6);
            }
    }
}

TEST(Encode, RoundTripWithinOneRasterizationStep) {
    std::mt19937 rng(3);
    const double tol = rasterization_step(kGeom);
    for (int trial = 0; trial < 200; ++trial) {
        const LineSegment s = random_segment(rng, trial % 2 ? LineKind::Concave : LineKind::Convex);
        const auto labels = encode_lines(std::vector<LineSegment>{s}, kGeom);
        const auto cells = traverse_cells(s, kGeom);
        const auto dets = decode_cells(labels.of(s.kind), 0.0);
        std::size_t nonzero = 0;
        for (const auto& d : dets) nonzero += d.confidence > 0;
        EXPECT_EQ(nonzero, cells.size());
        for (const auto& tr : cells) {
            const auto it = std::find_if(dets.begin(), dets.end(), [&](const CellDetection& d) {
                return d.row == tr.cell.row && d.col == tr.cell.col;
            });
            ASSERT_NE(it, dets.end());
            const LineSegment back = cell_to_pixels(*it, kGeom);
            EXPECT_LE(std::hypot(back.x1 - tr.clipped.x1, back.y1 - tr.clipped.y1), tol);
            EXPECT_LE(std::hypot(back.x2 - tr.clipped.x2, back.y2 - tr.clipped.y2), tol);
        }
    }
}

TEST(Encode, OutOfBoundsNamesSegment) {
    const std::vector<LineSegment> lines{{LineKind::Convex, 10, 10, 600, 10, 1}};
    try {
        encode_lines(lines, kGeom);
        FAIL();
    } catch (const BoundsError& e) {
        EXPECT_NE(std::string(e.what()).find("600"), std::string::npos);
    }
}

TEST(Decode, ZeroHeatmapIsEmpty) {
    EXPECT_TRUE(decode_cells(LabelPair::zeros(kGeom, LineKind::Convex), 0.75).empty());
}

TEST(Decode, SortsByConfidence) {
    LabelPair p = LabelPair::zeros(kGeom, LineKind::Convex);
    p.heatmap.at(3, 3) = 0.8f;
    p.heatmap.at(40, 1) = 0.9f;
    p.heatmap.at(1, 1) = 0.8f;
    const auto dets = decode_cells(p, 0.5);
    ASSERT_EQ(dets.size(), 3u);
    EXPECT_NEAR(dets[0].confidence, 0.9, 1e-6);
    EXPECT_EQ(dets[1].row, 1u);  // equal confidence falls back to row-major order
    EXPECT_EQ(dets[2].row, 3u);
}

TEST(Decode, ThresholdKeepsExactlyTheEncodedCells) {
    std::mt19937 rng(4);
    std::vector<LineSegment> lines;
    for (int i = 0; i < 5; ++i) lines.push_back(random_segment(rng));
    const auto labels = encode_lines(lines, kGeom);
    std::size_t expected = 0;
    for (float v : labels.convex.heatmap.data()) expected += v >= 0.5f;
    const auto dets = decode_cells(labels.convex, 0.5);
    EXPECT_EQ(dets.size(), expected);
    for (const auto& d : dets) EXPECT_GE(d.confidence, 0.5);
}

TEST(CellToPixels, Examples) {
    const CellDetection d{12, 0, 1.0, 0, 0.5, 1, 0.5, LineKind::Convex};
    const auto s = cell_to_pixels(d, kGeom);
    EXPECT_DOUBLE_EQ(s.x1, 0);
    EXPECT_DOUBLE_EQ(s.y1, 100);
    EXPECT_DOUBLE_EQ(s.x2, 16);
    EXPECT_DOUBLE_EQ(s.y2, 100);
    EXPECT_TRUE(cell_to_pixels(CellDetection{}, kGeom).degenerate());
}

TEST(LinesCsv, RoundTrip) {
    const std::vector<LineSegment> lines{{LineKind::Convex, 1.5, 2, 300.25, 4, 1},
                                         {LineKind::Concave, 0, 500, 511, 480, 1}};
    const auto back = parse_lines_csv(format_lines_csv(lines));
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[1].kind, LineKind::Concave);
    EXPECT_EQ(back[0].x2, 300.25);
    EXPECT_THROW(parse_lines_csv("kind,x1\n"), FormatError);
    EXPECT_THROW(parse_lines_csv("kind,x1,y1,x2,y2\nflat,0,0,1,1\n"), FormatError);
}

TEST(LabelFiles, WriteReadRoundTrip) {
    const auto dir = std::filesystem::temp_directory_path() / "stairkit_test_labels";
    std::filesystem::create_directories(dir);
    std::mt19937 rng(9);
    const std::vector<LineSegment> lines{random_segment(rng), random_segment(rng, LineKind::Concave)};
    const auto labels = encode_lines(lines, kGeom);
    write_labels(labels, dir / "x");
    const auto back = read_labels(dir / "x");
    EXPECT_EQ(back.convex.heatmap, labels.convex.heatmap);
    EXPECT_EQ(back.concave.locations, labels.concave.locations);
}

}  // namespace
}  // namespace stairkit
