#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace iwfsim {

// Dense row-major matrix of doubles. Rows index users, columns index channels
// throughout this library.
class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), v_(rows * cols, fill) {}
    Mat(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), v_(std::move(data)) {
        if (v_.size() != rows_ * cols_)
            throw std::invalid_argument("Mat: data size does not match rows*cols");
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return v_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return v_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return v_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {v_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {v_.data() + r * cols_, cols_}; }

    std::vector<double>& data() { return v_; }
    const std::vector<double>& data() const { return v_; }

    bool operator==(const Mat&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> v_;
};

}  // namespace iwfsim
