#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gestrec/classifier.hpp"
#include "gestrec/errors.hpp"
#include "gestrec/geometry.hpp"
#include "gestrec/hmm.hpp"
#include "gestrec/quantizer.hpp"
#include "gestrec/vb.hpp"

namespace gestrec {

// One recorded gesture: metadata plus either a quaternion stream or an
// already-quantized symbol sequence (exactly one of the two).
struct Recording {
    std::string user;
    std::string class_label;  // empty = unlabeled
    double sample_rate_hz = 6.7;
    std::string grid_id = "axes6";
    std::vector<int> symbols;  // 1-based, empty unless symbol payload
    std::vector<Quat> quats;   // empty unless quaternion payload

    bool has_symbols() const { return !symbols.empty(); }
    bool has_quats() const { return !quats.empty(); }
};

inline ObsSeq to_obs_seq(const Recording& rec, const QuantizerGrid& grid,
                         const Quat& q_ref = Quat::identity()) {
    if (rec.has_symbols()) return ObsSeq(rec.symbols, static_cast<int>(grid.size()));
    if (rec.has_quats()) return quantize_stream(rec.quats, q_ref, grid);
    throw DataError("recording has no payload");
}

namespace io_detail {

// 17 significant digits: enough for exact double round trips.
inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& s, const std::string& where) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw ParseError(where + ": expected number, got '" + s + "'");
    return v;
}

inline long parse_long(const std::string& s, const std::string& where) {
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0')
        throw ParseError(where + ": expected integer, got '" + s + "'");
    return v;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

// Line reader tracking position for diagnostics; skips blanks and comments.
class LineReader {
public:
    LineReader(const std::string& path) : path_(path), in_(path) {
        if (!in_) throw ParseError(path + ": cannot open file");
    }

    bool next(std::string& line) {
        while (std::getline(in_, line)) {
            ++lineno_;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            std::size_t start = line.find_first_not_of(" \t");
            if (start == std::string::npos) continue;
            if (line[start] == '#') continue;
            return true;
        }
        return false;
    }

    std::string where() const { return path_ + ":" + std::to_string(lineno_); }

    void expect_header(const std::string& header) {
        std::string line;
        if (!next(line) || line != header)
            throw ParseError(where() + ": expected header '" + header + "'");
    }

private:
    std::string path_;
    std::ifstream in_;
    int lineno_ = 0;
};

// Whole-file atomic write: emit to a temp file, then rename into place.
class AtomicWriter {
public:
    explicit AtomicWriter(const std::string& path) : path_(path), tmp_(path + ".tmp"), out_(tmp_) {
        if (!out_) throw DataError("cannot write to " + tmp_);
    }

    std::ostream& stream() { return out_; }

    void commit() {
        out_.flush();
        if (!out_) throw DataError("write failed for " + tmp_);
        out_.close();
        std::filesystem::rename(tmp_, path_);
    }

private:
    std::string path_;
    std::string tmp_;
    std::ofstream out_;
};

inline std::pair<std::string, std::string> key_value(const std::string& token,
                                                     const std::string& where) {
    const std::size_t eq = token.find('=');
    if (eq == std::string::npos)
        throw ParseError(where + ": expected key=value field, got '" + token + "'");
    return {token.substr(0, eq), token.substr(eq + 1)};
}

inline std::vector<double> parse_row(const std::string& line, const std::string& tag,
                                     std::size_t expect, const std::string& where) {
    std::istringstream ss(line);
    std::string head;
    ss >> head;
    if (head != tag) throw ParseError(where + ": expected '" + tag + "' row");
    std::vector<double> vals;
    std::string tok;
    while (ss >> tok) vals.push_back(parse_double(tok, where));
    if (vals.size() != expect)
        throw ParseError(where + ": expected " + std::to_string(expect) + " values, got " +
                         std::to_string(vals.size()));
    return vals;
}

inline void write_dirichlet_block(std::ostream& os, const DirichletHmm& dh) {
    os << "hpi";
    for (double v : dh.hpi) os << ' ' << fmt(v);
    os << '\n';
    for (std::size_t j = 0; j < dh.num_states(); ++j) {
        os << "hA";
        for (std::size_t i = 0; i < dh.hA.rows(); ++i) os << ' ' << fmt(dh.hA(i, j));
        os << '\n';
    }
    for (std::size_t j = 0; j < dh.num_states(); ++j) {
        os << "hC";
        for (std::size_t i = 0; i < dh.hC.rows(); ++i) os << ' ' << fmt(dh.hC(i, j));
        os << '\n';
    }
}

inline DirichletHmm read_dirichlet_block(LineReader& r, std::size_t M, std::size_t N) {
    DirichletHmm dh;
    dh.hA = Matrix(M, M);
    dh.hC = Matrix(N, M);
    dh.hpi.resize(M);
    std::string line;
    if (!r.next(line)) throw ParseError(r.where() + ": truncated model block (missing hpi)");
    const auto hpi = parse_row(line, "hpi", M, r.where());
    dh.hpi = hpi;
    for (std::size_t j = 0; j < M; ++j) {
        if (!r.next(line)) throw ParseError(r.where() + ": truncated model block (missing hA)");
        const auto col = parse_row(line, "hA", M, r.where());
        for (std::size_t i = 0; i < M; ++i) dh.hA(i, j) = col[i];
    }
    for (std::size_t j = 0; j < M; ++j) {
        if (!r.next(line)) throw ParseError(r.where() + ": truncated model block (missing hC)");
        const auto col = parse_row(line, "hC", N, r.where());
        for (std::size_t i = 0; i < N; ++i) dh.hC(i, j) = col[i];
    }
    dh.validate();
    return dh;
}

inline void write_point_block(std::ostream& os, const HmmPointParams& p) {
    os << "pi";
    for (double v : p.pi) os << ' ' << fmt(v);
    os << '\n';
    for (std::size_t j = 0; j < p.num_states(); ++j) {
        os << "A";
        for (std::size_t i = 0; i < p.A.rows(); ++i) os << ' ' << fmt(p.A(i, j));
        os << '\n';
    }
    for (std::size_t j = 0; j < p.num_states(); ++j) {
        os << "C";
        for (std::size_t i = 0; i < p.C.rows(); ++i) os << ' ' << fmt(p.C(i, j));
        os << '\n';
    }
}

inline HmmPointParams read_point_block(LineReader& r, std::size_t M, std::size_t N) {
    HmmPointParams p;
    p.A = Matrix(M, M);
    p.C = Matrix(N, M);
    p.pi.resize(M);
    std::string line;
    if (!r.next(line)) throw ParseError(r.where() + ": truncated parameter block (missing pi)");
    p.pi = parse_row(line, "pi", M, r.where());
    for (std::size_t j = 0; j < M; ++j) {
        if (!r.next(line)) throw ParseError(r.where() + ": truncated parameter block (missing A)");
        const auto col = parse_row(line, "A", M, r.where());
        for (std::size_t i = 0; i < M; ++i) p.A(i, j) = col[i];
    }
    for (std::size_t j = 0; j < M; ++j) {
        if (!r.next(line)) throw ParseError(r.where() + ": truncated parameter block (missing C)");
        const auto col = parse_row(line, "C", N, r.where());
        for (std::size_t i = 0; i < N; ++i) p.C(i, j) = col[i];
    }
    p.validate();
    return p;
}

}  // namespace io_detail

inline void save_grid(const std::string& path, const QuantizerGrid& grid,
                      const std::string& name = "custom") {
    io_detail::AtomicWriter w(path);
    w.stream() << "gestrec-grid v1\n";
    w.stream() << "name " << name << '\n';
    for (const Vec3& b : grid.basis())
        w.stream() << "basis " << io_detail::fmt(b.x) << ' ' << io_detail::fmt(b.y) << ' '
                   << io_detail::fmt(b.z) << '\n';
    w.commit();
}

inline QuantizerGrid load_grid(const std::string& path) {
    io_detail::LineReader r(path);
    r.expect_header("gestrec-grid v1");
    std::vector<Vec3> basis;
    std::string line;
    while (r.next(line)) {
        std::istringstream ss(line);
        std::string head;
        ss >> head;
        if (head == "name") continue;
        if (head != "basis") throw ParseError(r.where() + ": expected 'basis' row");
        std::string xs, ys, zs;
        if (!(ss >> xs >> ys >> zs)) throw ParseError(r.where() + ": basis row needs 3 components");
        basis.push_back({io_detail::parse_double(xs, r.where()),
                         io_detail::parse_double(ys, r.where()),
                         io_detail::parse_double(zs, r.where())});
    }
    if (basis.size() < 2) throw ParseError(path + ": grid needs at least 2 basis vectors");
    return QuantizerGrid(std::move(basis));
}

inline void save_recordings(const std::string& path, const std::vector<Recording>& recs) {
    io_detail::AtomicWriter w(path);
    w.stream() << "gestrec-recordings v1\n";
    for (const Recording& rec : recs) {
        if (rec.has_symbols() == rec.has_quats())
            throw DataError("recording must carry exactly one payload kind");
        w.stream() << "recording user=" << rec.user;
        if (!rec.class_label.empty()) w.stream() << " class=" << rec.class_label;
        w.stream() << " rate_hz=" << io_detail::fmt(rec.sample_rate_hz) << " grid=" << rec.grid_id;
        if (rec.has_symbols()) {
            w.stream() << " symbols=";
            for (std::size_t i = 0; i < rec.symbols.size(); ++i)
                w.stream() << (i ? "," : "") << rec.symbols[i];
        } else {
            w.stream() << " quats=";
            for (std::size_t i = 0; i < rec.quats.size(); ++i) {
                const Quat& q = rec.quats[i];
                w.stream() << (i ? ";" : "") << io_detail::fmt(q.w()) << ':'
                           << io_detail::fmt(q.x()) << ':' << io_detail::fmt(q.y()) << ':'
                           << io_detail::fmt(q.z());
            }
        }
        w.stream() << '\n';
    }
    w.commit();
}

inline std::vector<Recording> load_recordings(const std::string& path) {
    io_detail::LineReader r(path);
    r.expect_header("gestrec-recordings v1");
    std::vector<Recording> recs;
    std::string line;
    while (r.next(line)) {
        std::istringstream ss(line);
        std::string head;
        ss >> head;
        if (head != "recording") throw ParseError(r.where() + ": expected 'recording' line");
        Recording rec;
        rec.grid_id.clear();
        rec.sample_rate_hz = 0.0;
        std::string token;
        bool saw_payload = false;
        while (ss >> token) {
            auto [key, value] = io_detail::key_value(token, r.where());
            if (key == "user") {
                rec.user = value;
            } else if (key == "class") {
                rec.class_label = value;
            } else if (key == "rate_hz") {
                rec.sample_rate_hz = io_detail::parse_double(value, r.where());
            } else if (key == "grid") {
                rec.grid_id = value;
            } else if (key == "symbols") {
                if (saw_payload) throw ParseError(r.where() + ": recording has two payloads");
                saw_payload = true;
                for (const std::string& s : io_detail::split(value, ','))
                    rec.symbols.push_back(
                        static_cast<int>(io_detail::parse_long(s, r.where() + " symbols")));
            } else if (key == "quats") {
                if (saw_payload) throw ParseError(r.where() + ": recording has two payloads");
                saw_payload = true;
                for (const std::string& qs : io_detail::split(value, ';')) {
                    const auto parts = io_detail::split(qs, ':');
                    if (parts.size() != 4)
                        throw ParseError(r.where() + ": malformed quaternion '" + qs + "'");
                    try {
                        rec.quats.emplace_back(io_detail::parse_double(parts[0], r.where()),
                                               io_detail::parse_double(parts[1], r.where()),
                                               io_detail::parse_double(parts[2], r.where()),
                                               io_detail::parse_double(parts[3], r.where()));
                    } catch (const DataError& e) {
                        throw ParseError(r.where() + ": " + e.what());
                    }
                }
            } else {
                throw ParseError(r.where() + ": unknown field '" + key + "'");
            }
        }
        if (!saw_payload) throw ParseError(r.where() + ": recording has no payload");
        if (!(rec.sample_rate_hz > 0.0))
            throw ParseError(r.where() + ": rate_hz must be positive");
        recs.push_back(std::move(rec));
    }
    return recs;
}

inline void save_model(const std::string& path, const DirichletHmm& dh) {
    dh.validate();
    io_detail::AtomicWriter w(path);
    w.stream() << "gestrec-model v1\n";
    w.stream() << "M " << dh.num_states() << '\n';
    w.stream() << "N " << dh.hC.rows() << '\n';
    io_detail::write_dirichlet_block(w.stream(), dh);
    w.commit();
}

inline DirichletHmm load_model(const std::string& path) {
    io_detail::LineReader r(path);
    r.expect_header("gestrec-model v1");
    std::string line;
    if (!r.next(line)) throw ParseError(r.where() + ": missing M header");
    std::istringstream m_ss(line);
    std::string tag;
    long M = 0, N = 0;
    m_ss >> tag >> M;
    if (tag != "M" || M < 1) throw ParseError(r.where() + ": expected 'M <count>'");
    if (!r.next(line)) throw ParseError(r.where() + ": missing N header");
    std::istringstream n_ss(line);
    n_ss >> tag >> N;
    if (tag != "N" || N < 1) throw ParseError(r.where() + ": expected 'N <count>'");
    return io_detail::read_dirichlet_block(r, static_cast<std::size_t>(M),
                                           static_cast<std::size_t>(N));
}

inline void save_registry(const std::string& path, const ClassRegistry& reg) {
    io_detail::AtomicWriter w(path);
    const std::size_t M = reg.shared_prior().num_states();
    w.stream() << "gestrec-registry v1\n";
    w.stream() << "M " << M << '\n';
    w.stream() << "N " << reg.grid().size() << '\n';
    for (const Vec3& b : reg.grid().basis())
        w.stream() << "basis " << io_detail::fmt(b.x) << ' ' << io_detail::fmt(b.y) << ' '
                   << io_detail::fmt(b.z) << '\n';
    w.stream() << "prior\n";
    io_detail::write_dirichlet_block(w.stream(), reg.shared_prior());
    for (const auto& c : reg.classes()) {
        w.stream() << "class " << c.label << '\n';
        io_detail::write_dirichlet_block(w.stream(), c.posterior);
    }
    w.commit();
}

inline ClassRegistry load_registry(const std::string& path) {
    io_detail::LineReader r(path);
    r.expect_header("gestrec-registry v1");
    std::string line;
    if (!r.next(line)) throw ParseError(r.where() + ": missing M header");
    std::istringstream m_ss(line);
    std::string tag;
    long M = 0, N = 0;
    m_ss >> tag >> M;
    if (tag != "M" || M < 1) throw ParseError(r.where() + ": expected 'M <count>'");
    if (!r.next(line)) throw ParseError(r.where() + ": missing N header");
    std::istringstream n_ss(line);
    n_ss >> tag >> N;
    if (tag != "N" || N < 1) throw ParseError(r.where() + ": expected 'N <count>'");
    std::vector<Vec3> basis;
    for (long i = 0; i < N; ++i) {
        if (!r.next(line)) throw ParseError(r.where() + ": truncated grid block");
        std::istringstream ss(line);
        std::string head, xs, ys, zs;
        ss >> head;
        if (head != "basis") throw ParseError(r.where() + ": expected 'basis' row");
        if (!(ss >> xs >> ys >> zs)) throw ParseError(r.where() + ": basis row needs 3 components");
        basis.push_back({io_detail::parse_double(xs, r.where()),
                         io_detail::parse_double(ys, r.where()),
                         io_detail::parse_double(zs, r.where())});
    }
    if (!r.next(line) || line != "prior") throw ParseError(r.where() + ": expected 'prior' block");
    DirichletHmm prior = io_detail::read_dirichlet_block(r, static_cast<std::size_t>(M),
                                                         static_cast<std::size_t>(N));
    ClassRegistry reg(std::move(prior), QuantizerGrid(std::move(basis)));
    while (r.next(line)) {
        if (line.rfind("class ", 0) != 0)
            throw ParseError(r.where() + ": expected 'class <label>' block");
        const std::string label = line.substr(6);
        if (label.empty()) throw ParseError(r.where() + ": class label is empty");
        DirichletHmm posterior = io_detail::read_dirichlet_block(r, static_cast<std::size_t>(M),
                                                                 static_cast<std::size_t>(N));
        HmmPointParams point = dirichlet_mean(posterior);
        reg.add_model(GestureClassModel{label, std::move(posterior), std::move(point)});
    }
    return reg;
}

// Ground-truth generating parameters for a synthetic dataset.
struct Manifest {
    std::vector<std::pair<std::string, HmmPointParams>> true_params;
};

inline void save_manifest(const std::string& path, const Manifest& manifest) {
    io_detail::AtomicWriter w(path);
    if (manifest.true_params.empty()) throw DataError("manifest has no classes");
    const auto& first = manifest.true_params.front().second;
    w.stream() << "gestrec-manifest v1\n";
    w.stream() << "M " << first.num_states() << '\n';
    w.stream() << "N " << first.alphabet_size() << '\n';
    for (const auto& [label, params] : manifest.true_params) {
        w.stream() << "class " << label << '\n';
        io_detail::write_point_block(w.stream(), params);
    }
    w.commit();
}

inline Manifest load_manifest(const std::string& path) {
    io_detail::LineReader r(path);
    r.expect_header("gestrec-manifest v1");
    std::string line;
    if (!r.next(line)) throw ParseError(r.where() + ": missing M header");
    std::istringstream m_ss(line);
    std::string tag;
    long M = 0, N = 0;
    m_ss >> tag >> M;
    if (tag != "M" || M < 1) throw ParseError(r.where() + ": expected 'M <count>'");
    if (!r.next(line)) throw ParseError(r.where() + ": missing N header");
    std::istringstream n_ss(line);
    n_ss >> tag >> N;
    if (tag != "N" || N < 1) throw ParseError(r.where() + ": expected 'N <count>'");
    Manifest manifest;
    while (r.next(line)) {
        if (line.rfind("class ", 0) != 0)
            throw ParseError(r.where() + ": expected 'class <label>' block");
        const std::string label = line.substr(6);
        manifest.true_params.emplace_back(
            label, io_detail::read_point_block(r, static_cast<std::size_t>(M),
                                               static_cast<std::size_t>(N)));
    }
    if (manifest.true_params.empty()) throw ParseError(path + ": manifest has no classes");
    return manifest;
}

inline void save_stream(const std::string& path,
                        const std::vector<std::pair<double, Quat>>& stream) {
    io_detail::AtomicWriter w(path);
    w.stream() << "gestrec-stream v1\n";
    for (const auto& [t, q] : stream)
        w.stream() << "sample t=" << io_detail::fmt(t) << " q=" << io_detail::fmt(q.w()) << ':'
                   << io_detail::fmt(q.x()) << ':' << io_detail::fmt(q.y()) << ':'
                   << io_detail::fmt(q.z()) << '\n';
    w.commit();
}

inline std::vector<std::pair<double, Quat>> load_stream(const std::string& path) {
    io_detail::LineReader r(path);
    r.expect_header("gestrec-stream v1");
    std::vector<std::pair<double, Quat>> stream;
    std::string line;
    while (r.next(line)) {
        std::istringstream ss(line);
        std::string head;
        ss >> head;
        if (head != "sample") throw ParseError(r.where() + ": expected 'sample' line");
        double t = 0.0;
        bool saw_t = false, saw_q = false;
        Quat q;
        std::string token;
        while (ss >> token) {
            auto [key, value] = io_detail::key_value(token, r.where());
            if (key == "t") {
                t = io_detail::parse_double(value, r.where());
                saw_t = true;
            } else if (key == "q") {
                const auto parts = io_detail::split(value, ':');
                if (parts.size() != 4)
                    throw ParseError(r.where() + ": malformed quaternion '" + value + "'");
                try {
                    q = Quat(io_detail::parse_double(parts[0], r.where()),
                             io_detail::parse_double(parts[1], r.where()),
                             io_detail::parse_double(parts[2], r.where()),
                             io_detail::parse_double(parts[3], r.where()));
                } catch (const DataError& e) {
                    throw ParseError(r.where() + ": " + e.what());
                }
                saw_q = true;
            } else {
                throw ParseError(r.where() + ": unknown field '" + key + "'");
            }
        }
        if (!saw_t || !saw_q) throw ParseError(r.where() + ": sample needs t= and q= fields");
        stream.emplace_back(t, q);
    }
    return stream;
}

}  // namespace gestrec
