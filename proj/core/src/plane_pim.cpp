#include "flashpim/plane_pim.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace flashpim {

Mat8 make_mat8(int rows, int cols) {
    if (rows < 1 || cols < 1)
        throw std::invalid_argument("make_mat8: dimensions must be >= 1");
    Mat8 m;
    m.rows = rows;
    m.cols = cols;
    m.data.assign(static_cast<size_t>(rows) * cols, 0);
    return m;
}

void InputVector::validate() const {
    if (bit_width < 1 || bit_width > 31)
        throw std::invalid_argument("InputVector: bit_width must be in [1,31]");
    const uint32_t limit = 1u << bit_width;
    for (uint32_t v : values)
        if (v >= limit)
            throw std::invalid_argument("InputVector: value exceeds bit_width");
}

int AdcModel::step() const {
    if (resolution_bits < 1)
        throw std::invalid_argument("AdcModel: resolution_bits must be >= 1");
    const int levels = 1 << resolution_bits;
    return (full_scale + levels - 1) / levels;
}

int64_t AdcModel::quantize(int64_t bl_sum) const {
    if (mode == AdcMode::ideal) return bl_sum;
    const int s = step();
    const int64_t code = (2 * bl_sum + s) / (2 * s);  // round half up
    return code * s;
}

WeightArray pack_weights(const Mat8& weights) {
    if (weights.rows < 1 || weights.cols < 1)
        throw std::invalid_argument("pack_weights: empty matrix");
    if (weights.rows > kActivationHardLimit)
        throw std::invalid_argument("pack_weights: more than 256 rows per BL");
    WeightArray w;
    w.n_row_active = weights.rows;
    w.n_bl = 2 * weights.cols;
    w.cells.assign(static_cast<size_t>(w.n_row_active) * w.n_bl, 0);
    for (int r = 0; r < weights.rows; ++r) {
        for (int k = 0; k < weights.cols; ++k) {
            const uint8_t v = weights.at(r, k);
            w.cells[static_cast<size_t>(r) * w.n_bl + 2 * k] = v >> 4;         // high nibble
            w.cells[static_cast<size_t>(r) * w.n_bl + 2 * k + 1] = v & 0x0F;   // low nibble
        }
    }
    return w;
}

Mat8 unpack_weights(const WeightArray& w) {
    Mat8 m = make_mat8(w.n_row_active, w.weight_cols());
    for (int r = 0; r < m.rows; ++r)
        for (int k = 0; k < m.cols; ++k)
            m.at(r, k) = static_cast<uint8_t>((w.cell(r, 2 * k) << 4) | w.cell(r, 2 * k + 1));
    return m;
}

Mat8 to_unsigned_weights(const std::vector<std::vector<int8_t>>& w, int* offset_out) {
    if (w.empty() || w[0].empty())
        throw std::invalid_argument("to_unsigned_weights: empty matrix");
    Mat8 m = make_mat8(static_cast<int>(w.size()), static_cast<int>(w[0].size()));
    for (int r = 0; r < m.rows; ++r) {
        if (static_cast<int>(w[r].size()) != m.cols)
            throw std::invalid_argument("to_unsigned_weights: ragged matrix");
        for (int c = 0; c < m.cols; ++c)
            m.at(r, c) = static_cast<uint8_t>(static_cast<int>(w[r][c]) + 128);
    }
    if (offset_out) *offset_out = 128;
    return m;
}

std::vector<int64_t> pim_dot_product(const WeightArray& w, const InputVector& x,
                                     const AdcModel& adc, int activation_limit) {
    x.validate();
    if (static_cast<int>(x.values.size()) != w.n_row_active)
        throw std::invalid_argument("pim_dot_product: input length != active rows");
    if (w.n_row_active > kActivationHardLimit)
        throw std::invalid_argument("pim_dot_product: exceeds 256-cell BL accumulation ceiling");
    if (w.n_row_active > activation_limit)
        throw std::invalid_argument("pim_dot_product: exceeds activation limit");

    const int cols = w.weight_cols();
    std::vector<int64_t> out(cols, 0);
    std::vector<int64_t> bl_sum(w.n_bl, 0);
    for (int b = 0; b < x.bit_width; ++b) {
        std::fill(bl_sum.begin(), bl_sum.end(), 0);
        for (int r = 0; r < w.n_row_active; ++r) {
            if (((x.values[r] >> b) & 1u) == 0) continue;
            const uint8_t* row = &w.cells[static_cast<size_t>(r) * w.n_bl];
            for (int bl = 0; bl < w.n_bl; ++bl) bl_sum[bl] += row[bl];
        }
        const int64_t scale = int64_t{1} << b;
        for (int k = 0; k < cols; ++k) {
            const int64_t hi = adc.quantize(bl_sum[2 * k]);
            const int64_t lo = adc.quantize(bl_sum[2 * k + 1]);
            out[k] += scale * (hi * 16 + lo);
        }
    }
    return out;
}

PimCycles pim_cycles(int w_cols, const InputVector& x, int mux_ratio) {
    if (mux_ratio < 1)
        throw std::invalid_argument("pim_cycles: mux_ratio must be >= 1");
    x.validate();
    PimCycles c;
    c.bit_passes = x.bit_width;
    c.concurrent_cols = w_cols / mux_ratio;
    return c;
}

std::vector<int64_t> mvm_oracle(const Mat8& w, const InputVector& x) {
    x.validate();
    if (static_cast<int>(x.values.size()) != w.rows)
        throw std::invalid_argument("mvm_oracle: dimension mismatch");
    std::vector<int64_t> out(w.cols, 0);
    for (int r = 0; r < w.rows; ++r)
        for (int c = 0; c < w.cols; ++c)
            out[c] += static_cast<int64_t>(w.at(r, c)) * x.values[r];
    return out;
}

namespace {
constexpr char kMagic[4] = {'F', 'P', 'W', '8'};

uint32_t read_u32le(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void write_u32le(std::ostream& out, uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF),
                                static_cast<unsigned char>((v >> 8) & 0xFF),
                                static_cast<unsigned char>((v >> 16) & 0xFF),
                                static_cast<unsigned char>((v >> 24) & 0xFF)};
    out.write(reinterpret_cast<const char*>(b), 4);
}
}  // namespace

Mat8 load_weights_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_weights_binary: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("load_weights_binary: bad magic in " + path);
    const uint32_t rows = read_u32le(in);
    const uint32_t cols = read_u32le(in);
    read_u32le(in);  // reserved
    if (!in || rows == 0 || cols == 0)
        throw std::runtime_error("load_weights_binary: bad header in " + path);
    Mat8 m = make_mat8(static_cast<int>(rows), static_cast<int>(cols));
    in.read(reinterpret_cast<char*>(m.data.data()), static_cast<std::streamsize>(m.data.size()));
    if (!in) throw std::runtime_error("load_weights_binary: truncated file " + path);
    return m;
}

void store_weights_binary(const Mat8& w, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("store_weights_binary: cannot open " + path);
    out.write(kMagic, 4);
    write_u32le(out, static_cast<uint32_t>(w.rows));
    write_u32le(out, static_cast<uint32_t>(w.cols));
    write_u32le(out, 0);
    out.write(reinterpret_cast<const char*>(w.data.data()),
              static_cast<std::streamsize>(w.data.size()));
    if (!out) throw std::runtime_error("store_weights_binary: write failed " + path);
}

Mat8 load_weights_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_weights_csv: cannot open " + path);
    std::vector<std::vector<uint8_t>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<uint8_t> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            const long v = std::strtol(cell.c_str(), nullptr, 10);
            if (v < 0 || v > 255)
                throw std::runtime_error("load_weights_csv: value out of uint8 range");
            row.push_back(static_cast<uint8_t>(v));
        }
        if (!rows.empty() && row.size() != rows[0].size())
            throw std::runtime_error("load_weights_csv: ragged rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("load_weights_csv: empty file");
    Mat8 m = make_mat8(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (int r = 0; r < m.rows; ++r)
        for (int c = 0; c < m.cols; ++c) m.at(r, c) = rows[r][c];
    return m;
}

void store_weights_csv(const Mat8& w, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("store_weights_csv: cannot open " + path);
    for (int r = 0; r < w.rows; ++r) {
        for (int c = 0; c < w.cols; ++c) {
            out << static_cast<int>(w.at(r, c));
            if (c + 1 < w.cols) out << ',';
        }
        out << '\n';
    }
}

}  // namespace flashpim
