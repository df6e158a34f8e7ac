#include "lgt/operator_io.hpp"

#include <fstream>
#include <sstream>

#include "binary_io.hpp"

namespace lgt {

using detail::read_f64;
using detail::read_u32;
using detail::write_f64;
using detail::write_u32;

void write_operators(std::ostream& out, const TransformChain& chain) {
    const auto n = static_cast<std::uint32_t>(chain.dim());
    out.write("LGT1", 4);
    write_u32(out, kOperatorFileVersion);
    write_u32(out, static_cast<std::uint32_t>(chain.size()));
    write_u32(out, n);
    for (const auto& op : chain.ops()) {
        for (Index r = 0; r < op.size(); ++r) {
            for (Index c = 0; c < op.size(); ++c) {
                write_f64(out, op.u()(r, c).real());
                write_f64(out, op.u()(r, c).imag());
            }
        }
        for (Index i = 0; i < op.size(); ++i) {
            write_f64(out, op.lambda()[i].real());
            write_f64(out, op.lambda()[i].imag());
        }
    }
    if (!out) throw Error("failed writing operator file");
}

void write_operators(const std::filesystem::path& path, const TransformChain& chain) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    write_operators(out, chain);
}

TransformChain read_operators(std::istream& in, std::optional<Index> expected_n) {
    detail::expect_magic(in, "LGT1");
    const std::uint32_t version = read_u32(in, "version");
    if (version != kOperatorFileVersion) {
        throw FormatError("unsupported LGT1 version " + std::to_string(version));
    }
    const std::uint32_t k_ops = read_u32(in, "operator count");
    const std::uint32_t n32 = read_u32(in, "patch size");
    const auto n = static_cast<Index>(n32);
    if (n == 0) throw FormatError("LGT1 patch size must be positive");
    if (expected_n && *expected_n != n) {
        std::ostringstream msg;
        msg << "operator file is for n = " << n << ", expected n = " << *expected_n;
        throw DimensionMismatch(msg.str());
    }

    std::vector<LieOperator> ops;
    ops.reserve(k_ops);
    for (std::uint32_t k = 0; k < k_ops; ++k) {
        ComplexMatrix u(n, n);
        for (Index r = 0; r < n; ++r) {
            for (Index c = 0; c < n; ++c) {
                const double re = read_f64(in, "U");
                const double im = read_f64(in, "U");
                u(r, c) = Complex(re, im);
            }
        }
        ComplexVector lambda(n);
        for (Index i = 0; i < n; ++i) {
            const double re = read_f64(in, "lambda");
            const double im = read_f64(in, "lambda");
            lambda[i] = Complex(re, im);
        }
        ops.push_back(LieOperator::from_eigen(std::move(u), std::move(lambda)));
    }
    char extra = 0;
    if (in.read(&extra, 1)) throw FormatError("trailing bytes after LGT1 payload");
    return TransformChain(std::move(ops));
}

TransformChain read_operators(const std::filesystem::path& path, std::optional<Index> expected_n) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingModelFile("cannot open operator file " + path.string());
    return read_operators(in, expected_n);
}

}  // namespace lgt
