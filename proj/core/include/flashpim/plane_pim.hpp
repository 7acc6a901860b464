#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace flashpim {

/// Dense row-major matrix of unsigned 8-bit values.
struct Mat8 {
    int rows = 0;
    int cols = 0;
    std::vector<uint8_t> data;

    uint8_t at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
    uint8_t& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
};

Mat8 make_mat8(int rows, int cols);

/// QLC cell grid holding packed 8-bit weights: weight column k occupies
/// BL 2k (high nibble) and BL 2k+1 (low nibble).
struct WeightArray {
    int n_row_active = 0;  // rows of the packed matrix
    int n_bl = 0;          // 2 * weight columns
    std::vector<uint8_t> cells;  // row-major [n_row_active x n_bl], values 0..15

    int weight_cols() const { return n_bl / 2; }
    std::pair<int, int> column_pairing(int k) const { return {2 * k, 2 * k + 1}; }
    uint8_t cell(int r, int bl) const { return cells[static_cast<size_t>(r) * n_bl + bl]; }
};

struct InputVector {
    std::vector<uint32_t> values;
    int bit_width = 8;

    void validate() const;
};

enum class AdcMode { ideal, quantizing };

/// SAR ADC model. Ideal mode returns the exact integer BL sum; quantizing
/// mode rounds half-up to a step of ceil(full_scale / 2^resolution_bits).
struct AdcModel {
    int resolution_bits = 9;
    AdcMode mode = AdcMode::ideal;
    int full_scale = 1920;  // 128 active rows x max QLC value 15

    int step() const;
    int64_t quantize(int64_t bl_sum) const;
};

// 256 cells accumulating on one BL is the reliability ceiling; the
// operating default activates 128 rows.
inline constexpr int kActivationHardLimit = 256;
inline constexpr int kDefaultActiveRows = 128;

/// Nibble-split packing of an unsigned 8-bit weight matrix.
/// unpack_weights(pack_weights(W)) == W.
WeightArray pack_weights(const Mat8& weights);
Mat8 unpack_weights(const WeightArray& w);

/// Shift signed int8 weights into unsigned storage. Returns the offset
/// (128) the caller must fold back as offset * sum(x) per output.
Mat8 to_unsigned_weights(const std::vector<std::vector<int8_t>>& w, int* offset_out);

/// Bit-serial analog dot product: per input bit, per BL current sum,
/// ADC digitization, shift-add recombination (x16 for high-nibble BLs,
/// x2^b per bit pass). Output k corresponds to weight column k.
std::vector<int64_t> pim_dot_product(const WeightArray& w, const InputVector& x,
                                     const AdcModel& adc,
                                     int activation_limit = kDefaultActiveRows);

struct PimCycles {
    int bit_passes = 0;
    int concurrent_cols = 0;  // columns sensed per pass through the mux
};

PimCycles pim_cycles(int w_cols, const InputVector& x, int mux_ratio);

/// Reference integer MVM used as the oracle path in tests and tools.
std::vector<int64_t> mvm_oracle(const Mat8& w, const InputVector& x);

// Weight matrix file I/O. Binary format is row-major uint8 with a
// 16-byte header: magic "FPW8", uint32 little-endian rows, cols, reserved.
Mat8 load_weights_binary(const std::string& path);
void store_weights_binary(const Mat8& w, const std::string& path);
Mat8 load_weights_csv(const std::string& path);
void store_weights_csv(const Mat8& w, const std::string& path);

}  // namespace flashpim
