#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "negcurv/errors.hpp"
#include "negcurv/field_io.hpp"
#include "negcurv/grid.hpp"
#include "negcurv/linalg.hpp"

using namespace negcurv;

TEST(GridSpec, CubeSpacingTimesCellsEqualsExtent) {
    const GridSpec g = GridSpec::cube(3, -1.0, 1.0, 17);
    EXPECT_EQ(g.size(), 17u * 17u * 17u);
    for (int a = 0; a < 3; ++a) {
        EXPECT_DOUBLE_EQ(g.spacing[a], 0.125);
        EXPECT_DOUBLE_EQ(g.extent(a), 2.0);
    }
}

TEST(GridSpec, FlatIndexRoundTrips) {
    const GridSpec g = GridSpec::box({0.0, -1.0, 2.0}, {1.0, 2.0, 3.0}, {4, 5, 6});
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(g.flat(g.unravel(i)), i);
    // Axis 0 varies slowest.
    EXPECT_EQ(g.stride(0), 30u);
    EXPECT_EQ(g.stride(2), 1u);
    const Point p = g.position(g.flat({3, 4, 5, 0}));
    EXPECT_DOUBLE_EQ(p[0], 1.0);
    EXPECT_DOUBLE_EQ(p[1], 1.0);
    EXPECT_DOUBLE_EQ(p[2], 5.0);
}

TEST(GridSpec, RejectsBadInput) {
    EXPECT_THROW(GridSpec::cube(5, 0.0, 1.0, 4), Error);
    EXPECT_THROW(GridSpec::cube(2, 0.0, 1.0, 1), Error);
    EXPECT_THROW(GridSpec::box({0.0}, {-1.0}, {4}), Error);
    try {
        GridSpec::cube(5, 0.0, 1.0, 4);
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DimensionError);
        EXPECT_FALSE(e.is_numerical());
    }
}

TEST(Fields, ValueCountMustMatch) {
    const GridSpec g = GridSpec::cube(2, 0.0, 1.0, 4);
    EXPECT_THROW(ScalarField(g, std::vector<double>(3)), Error);
    ScalarField f(g);
    EXPECT_TRUE(f.all_finite());
    f[2] = std::nan("");
    EXPECT_FALSE(f.all_finite());
}

TEST(Fields, SymmetricStorageIsStructural) {
    const GridSpec g = GridSpec::cube(3, 0.0, 1.0, 4);
    SymmetricMatrixField m(g);
    m(5, 0, 2) = 7.0;
    EXPECT_EQ(m(5, 2, 0), 7.0);
    EXPECT_EQ(m.values().size(), g.size() * 6);
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            const int k = SymmetricMatrixField::packed_index(3, i, j);
            EXPECT_GE(k, 0);
            EXPECT_LT(k, 6);
        }
}

TEST(SmallMatrix, InverseAndDeterminantAgreeAcrossSizes) {
    for (int n = 1; n <= 4; ++n) {
        SmallMatrix m(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = (i == j ? 3.0 : 0.0) + 0.3 * (i + 1) - 0.2 * j;
        const SmallMatrix id = m * m.inverse();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) EXPECT_NEAR(id(i, j), i == j ? 1.0 : 0.0, 1e-13);
        EXPECT_NEAR(m.determinant() * m.inverse().determinant(), 1.0, 1e-13);
    }
}

TEST(SmallMatrix, EigenvaluesAscending) {
    const auto ev = SmallMatrix::diagonal({2.0, -1.0, 0.5}).symmetric_eigenvalues();
    EXPECT_DOUBLE_EQ(ev[0], -1.0);
    EXPECT_DOUBLE_EQ(ev[1], 0.5);
    EXPECT_DOUBLE_EQ(ev[2], 2.0);
}

TEST(FieldIo, CsvRoundTripIsBitExact) {
    const GridSpec g = GridSpec::cube(2, -1.0, 1.0, 5);
    const ScalarField f = ScalarField::sample(g, [](const Point& p) { return std::exp(p[0]) / 3.0 + p[1]; });
    std::stringstream ss;
    write_csv(ss, f, "u");
    std::string header;
    std::getline(ss, header);
    EXPECT_EQ(header, "x0,x1,u");
    ss.seekg(0);
    const ScalarField back = read_csv(ss, g);
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(back[i], f[i]);
}

TEST(FieldIo, ScientificNotationWithDot) {
    EXPECT_EQ(format_double(0.5), "5.0000000000000000e-01");
    EXPECT_EQ(format_double(-1.0), "-1.0000000000000000e+00");
}

TEST(FieldIo, GridDescriptorRoundTrips) {
    const GridSpec g = GridSpec::box({0.0, -2.0}, {1.0, 4.0}, {9, 33});
    EXPECT_EQ(grid_from_json(grid_to_json(g)), g);
    const auto d = field_descriptor(g, "u", "u.csv");
    EXPECT_EQ(d["grid"]["points"][1], 33);
}

TEST(FieldIo, MaskCsvListsOnlyMembers) {
    const GridSpec g = GridSpec::cube(2, 0.0, 1.0, 3);
    std::vector<std::uint8_t> mask(g.size(), 0);
    mask[4] = 1;
    std::stringstream ss;
    write_mask_csv(ss, g, mask);
    std::string header, row, extra;
    std::getline(ss, header);
    std::getline(ss, row);
    EXPECT_EQ(header, "i0,i1,x0,x1");
    EXPECT_EQ(row.substr(0, 4), "1,1,");
    EXPECT_FALSE(std::getline(ss, extra));
}
