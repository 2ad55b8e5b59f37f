#pragma once

#include <cstdint>
#include <vector>

// Reference index-assignment tables (normalized to a unit central step).
// Layout: one row per central point b, followed by the k assigned side points.
namespace golden {

struct Row {
    std::int64_t b;
    std::vector<std::int64_t> tuple;
};

inline const std::vector<Row>& r3k2() {
    static const std::vector<Row> t = {
        {-4, {-6, -3}}, {-3, {-3, -3}}, {-2, {-3, 0}}, {-1, {0, -3}}, {0, {0, 0}},
        {1, {3, 0}},    {2, {0, 3}},    {3, {3, 3}},   {4, {6, 3}},
    };
    return t;
}

inline const std::vector<Row>& r3k3() {
    static const std::vector<Row> t = {
        {-4, {-3, -3, -6}}, {-3, {-3, -3, -3}}, {-2, {0, -3, -3}}, {-1, {0, 0, -3}}, {0, {0, 0, 0}},
        {1, {0, 0, 3}},     {2, {0, 3, 3}},     {3, {3, 3, 3}},    {4, {3, 3, 6}},
    };
    return t;
}

inline const std::vector<Row>& r7k3() {
    static const std::vector<Row> t = {
        {0, {0, 0, 0}},       {1, {0, 0, 7}},       {2, {7, 0, 0}},       {3, {0, 7, 0}},
        {4, {0, 7, 7}},       {5, {7, 7, 0}},       {6, {7, 0, 7}},       {7, {7, 7, 7}},
        {8, {14, 7, 7}},      {9, {7, 14, 7}},      {10, {7, 7, 14}},     {11, {7, 14, 14}},
        {12, {14, 14, 7}},    {13, {14, 7, 14}},    {14, {14, 14, 14}},   {15, {14, 14, 21}},
        {16, {21, 14, 14}},   {17, {14, 21, 14}},   {18, {14, 21, 21}},   {19, {21, 21, 14}},
        {20, {21, 14, 21}},   {21, {21, 14, 28}},   {22, {14, 21, 28}},   {23, {21, 21, 21}},
        {24, {21, 21, 28}},   {-24, {-21, -21, -28}}, {-23, {-21, -14, -28}}, {-22, {-14, -21, -28}},
        {-21, {-21, -21, -21}}, {-20, {-21, -21, -14}}, {-19, {-21, -14, -21}}, {-18, {-14, -21, -21}},
        {-17, {-14, -14, -21}}, {-16, {-21, -14, -14}}, {-15, {-14, -21, -14}}, {-14, {-14, -14, -14}},
        {-13, {-14, -14, -7}},  {-12, {-14, -7, -14}},  {-11, {-7, -14, -14}},  {-10, {-7, -7, -14}},
        {-9, {-14, -7, -7}},    {-8, {-7, -14, -7}},    {-7, {-7, -7, -7}},     {-6, {-7, -7, 0}},
        {-5, {-7, 0, -7}},      {-4, {0, -7, -7}},      {-3, {0, 0, -7}},       {-2, {-7, 0, 0}},
        {-1, {0, -7, 0}},
    };
    return t;
}

// Reference distortion table: step divisor n (delta = 2*sqrt(12)/n), then
// measured D and model sigma^2 in dB for combining 1, 2, 3 descriptions.
struct DistortionRow {
    int n;
    double d1, s1, d2, s2, d3, s3;
};

inline const std::vector<DistortionRow>& distortion_table() {
    static const std::vector<DistortionRow> t = {
        {1, 27.38, 27.84, 21.65, 21.91, 6.02, 6.02},
        {3, 17.94, 18.30, 12.20, 12.37, -3.51, -3.52},
        {5, 13.51, 13.87, 7.95, 7.93, -7.96, -7.96},
        {7, 10.64, 10.94, 5.25, 5.01, -10.89, -10.88},
        {9, 8.51, 8.76, 3.22, 2.82, -13.07, -13.06},
    };
    return t;
}

}  // namespace golden
