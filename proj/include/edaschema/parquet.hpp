#pragma once

#include <cstdint>
#include <cstring>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edaschema/errors.hpp"

// Apache Parquet subset: one row group, PLAIN encoding, no compression,
// flat schemas of BOOLEAN / INT64 / DOUBLE / BYTE_ARRAY columns that are
// REQUIRED or OPTIONAL. Definition levels use the RLE run form. The
// reader handles exactly this subset, which is what the writer emits
// and what columnar tools accept.
namespace eda::parquet {

enum class Type { boolean, int64, float64, byte_array };

struct Column {
    std::string name;
    Type type = Type::float64;
    bool optional = false;
    // present[i] tells whether row i carries a value; value vectors hold
    // the defined entries in row order. Required columns leave `present`
    // empty and give one value per row.
    std::vector<std::uint8_t> present;
    std::vector<std::uint8_t> bools;
    std::vector<std::int64_t> i64s;
    std::vector<double> f64s;
    std::vector<std::string> strings;

    size_t defined_count() const {
        switch (type) {
            case Type::boolean: return bools.size();
            case Type::int64: return i64s.size();
            case Type::float64: return f64s.size();
            case Type::byte_array: return strings.size();
        }
        return 0;
    }

    friend bool operator==(const Column&, const Column&) = default;
};

struct Table {
    std::int64_t num_rows = 0;
    std::vector<Column> columns;

    Column* find(const std::string& name) {
        for (auto& c : columns)
            if (c.name == name) return &c;
        return nullptr;
    }
    const Column* find(const std::string& name) const {
        for (const auto& c : columns)
            if (c.name == name) return &c;
        return nullptr;
    }

    friend bool operator==(const Table&, const Table&) = default;
};

namespace detail {

// --- thrift compact protocol -----------------------------------------------

enum class TType : std::uint8_t {
    stop = 0,
    bool_true = 1,
    bool_false = 2,
    i8 = 3,
    i16 = 4,
    i32 = 5,
    i64 = 6,
    floating = 7,
    binary = 8,
    list = 9,
    set = 10,
    map = 11,
    structure = 12,
};

class ThriftWriter {
  public:
    std::string out;

    void varint(std::uint64_t v) {
        while (v >= 0x80) {
            out += char((v & 0x7f) | 0x80);
            v >>= 7;
        }
        out += char(v);
    }
    static std::uint64_t zigzag(std::int64_t v) {
        return (std::uint64_t(v) << 1) ^ std::uint64_t(v >> 63);
    }
    void field(int id, TType type) {
        int delta = id - last_id_;
        if (delta > 0 && delta <= 15) {
            out += char((delta << 4) | int(type));
        } else {
            out += char(int(type));
            varint(zigzag(id));
        }
        last_id_ = id;
    }
    void i32_field(int id, std::int64_t v) {
        field(id, TType::i32);
        varint(zigzag(v));
    }
    void i64_field(int id, std::int64_t v) {
        field(id, TType::i64);
        varint(zigzag(v));
    }
    void string_field(int id, const std::string& s) {
        field(id, TType::binary);
        varint(s.size());
        out += s;
    }
    void list_header(size_t size, TType elem) {
        if (size < 15) {
            out += char((size << 4) | int(elem));
        } else {
            out += char(0xF0 | int(elem));
            varint(size);
        }
    }
    void begin_struct() { id_stack_.push_back(last_id_); last_id_ = 0; }
    void end_struct() {
        out += char(0);
        last_id_ = id_stack_.back();
        id_stack_.pop_back();
    }

  private:
    int last_id_ = 0;
    std::vector<int> id_stack_;
};

class ThriftReader {
  public:
    ThriftReader(std::span<const std::uint8_t> data, size_t pos = 0)
        : data_(data), pos_(pos) {}

    size_t pos() const { return pos_; }

    std::uint8_t byte() {
        if (pos_ >= data_.size()) throw ParseError("thrift data truncated");
        return data_[pos_++];
    }
    std::uint64_t varint() {
        std::uint64_t v = 0;
        int shift = 0;
        while (true) {
            std::uint8_t b = byte();
            v |= std::uint64_t(b & 0x7f) << shift;
            if (!(b & 0x80)) break;
            shift += 7;
        }
        return v;
    }
    std::int64_t zigzag() {
        std::uint64_t v = varint();
        return std::int64_t(v >> 1) ^ -std::int64_t(v & 1);
    }
    std::string binary() {
        size_t len = varint();
        if (pos_ + len > data_.size()) throw ParseError("thrift string truncated");
        std::string s(reinterpret_cast<const char*>(data_.data()) + pos_, len);
        pos_ += len;
        return s;
    }

    struct FieldHeader {
        int id = 0;
        TType type = TType::stop;
        bool bool_value = false;
    };

    FieldHeader read_field(int last_id) {
        std::uint8_t b = byte();
        FieldHeader f;
        if (b == 0) return f;
        int delta = b >> 4;
        f.type = TType(b & 0x0f);
        f.id = delta ? last_id + delta : int(zigzag());
        if (f.type == TType::bool_true) f.bool_value = true;
        return f;
    }

    void skip(TType type) {
        switch (type) {
            case TType::bool_true:
            case TType::bool_false: break;  // value lives in the header
            case TType::i8: byte(); break;
            case TType::i16:
            case TType::i32:
            case TType::i64: varint(); break;
            case TType::floating: pos_ += 8; break;
            case TType::binary: binary(); break;
            case TType::list:
            case TType::set: {
                std::uint8_t h = byte();
                size_t n = h >> 4;
                TType elem = TType(h & 0x0f);
                if (n == 15) n = varint();
                for (size_t i = 0; i < n; ++i) skip(elem);
                break;
            }
            case TType::structure: {
                int last = 0;
                while (true) {
                    FieldHeader f = read_field(last);
                    if (f.type == TType::stop) break;
                    skip(f.type);
                    last = f.id;
                }
                break;
            }
            default: throw ParseError("unsupported thrift type");
        }
    }

  private:
    std::span<const std::uint8_t> data_;
    size_t pos_;
};

// --- parquet enum values ----------------------------------------------------

inline int physical_type(Type t) {
    switch (t) {
        case Type::boolean: return 0;
        case Type::int64: return 2;
        case Type::float64: return 5;
        case Type::byte_array: return 6;
    }
    return 5;
}

inline Type from_physical(int t) {
    switch (t) {
        case 0: return Type::boolean;
        case 2: return Type::int64;
        case 5: return Type::float64;
        case 6: return Type::byte_array;
        default: throw ParseError("unsupported parquet physical type");
    }
}

inline void plain_encode(const Column& c, std::string& out) {
    switch (c.type) {
        case Type::boolean: {
            std::uint8_t acc = 0;
            int n = 0;
            for (auto b : c.bools) {
                if (b) acc |= std::uint8_t(1u << n);
                if (++n == 8) {
                    out += char(acc);
                    acc = 0;
                    n = 0;
                }
            }
            if (n) out += char(acc);
            break;
        }
        case Type::int64:
            for (auto v : c.i64s)
                for (int i = 0; i < 8; ++i) out += char((std::uint64_t(v) >> (8 * i)) & 0xff);
            break;
        case Type::float64:
            for (auto v : c.f64s) {
                std::uint64_t bits;
                std::memcpy(&bits, &v, 8);
                for (int i = 0; i < 8; ++i) out += char((bits >> (8 * i)) & 0xff);
            }
            break;
        case Type::byte_array:
            for (const auto& s : c.strings) {
                std::uint32_t len = std::uint32_t(s.size());
                for (int i = 0; i < 4; ++i) out += char((len >> (8 * i)) & 0xff);
                out += s;
            }
            break;
    }
}

// definition levels, bit width 1, RLE runs with a 4-byte length prefix
inline std::string encode_def_levels(const std::vector<std::uint8_t>& present) {
    ThriftWriter runs;  // reuse the varint helper
    size_t i = 0;
    while (i < present.size()) {
        size_t j = i;
        while (j < present.size() && present[j] == present[i]) ++j;
        runs.varint((j - i) << 1);
        runs.out += char(present[i] ? 1 : 0);
        i = j;
    }
    std::string out;
    std::uint32_t len = std::uint32_t(runs.out.size());
    for (int b = 0; b < 4; ++b) out += char((len >> (8 * b)) & 0xff);
    out += runs.out;
    return out;
}

inline std::vector<std::uint8_t> decode_def_levels(std::span<const std::uint8_t> data,
                                                   size_t& pos, size_t num_values) {
    if (pos + 4 > data.size()) throw ParseError("definition levels truncated");
    std::uint32_t len = 0;
    for (int b = 0; b < 4; ++b) len |= std::uint32_t(data[pos + b]) << (8 * b);
    pos += 4;
    ThriftReader rd(data.subspan(pos, len));
    std::vector<std::uint8_t> out;
    out.reserve(num_values);
    while (out.size() < num_values) {
        std::uint64_t header = rd.varint();
        if (header & 1) {
            // bit-packed group: 8 * (header >> 1) values
            size_t groups = header >> 1;
            for (size_t g = 0; g < groups; ++g) {
                std::uint8_t b = rd.byte();
                for (int i = 0; i < 8 && out.size() < num_values; ++i)
                    out.push_back((b >> i) & 1u);
            }
        } else {
            size_t count = header >> 1;
            std::uint8_t value = rd.byte();
            for (size_t i = 0; i < count; ++i) out.push_back(value & 1u);
        }
    }
    pos += len;
    return out;
}

}  // namespace detail

inline std::string encode_table(const Table& table) {
    using namespace detail;
    std::string file = "PAR1";

    struct ChunkInfo {
        std::int64_t offset;
        std::int64_t size;
        std::int64_t num_values;
    };
    std::vector<ChunkInfo> chunks;

    for (const auto& col : table.columns) {
        if (col.optional && std::int64_t(col.present.size()) != table.num_rows)
            throw std::invalid_argument("optional column " + col.name +
                                        " present-mask size mismatch");
        if (!col.optional && std::int64_t(col.defined_count()) != table.num_rows)
            throw std::invalid_argument("required column " + col.name +
                                        " value count mismatch");

        std::string payload;
        if (col.optional) payload = encode_def_levels(col.present);
        plain_encode(col, payload);

        ThriftWriter header;
        header.begin_struct();
        header.i32_field(1, 0);  // DATA_PAGE
        header.i32_field(2, std::int64_t(payload.size()));
        header.i32_field(3, std::int64_t(payload.size()));
        header.field(5, TType::structure);  // DataPageHeader
        header.begin_struct();
        header.i32_field(1, table.num_rows);  // num_values (levels included)
        header.i32_field(2, 0);               // PLAIN
        header.i32_field(3, 3);               // RLE definition levels
        header.i32_field(4, 3);               // RLE repetition levels
        header.end_struct();
        header.end_struct();

        chunks.push_back({std::int64_t(file.size()),
                          std::int64_t(header.out.size() + payload.size()),
                          table.num_rows});
        file += header.out;
        file += payload;
    }

    ThriftWriter md;
    md.begin_struct();
    md.i32_field(1, 1);  // version
    md.field(2, TType::list);
    md.list_header(table.columns.size() + 1, TType::structure);
    {  // root schema element
        md.begin_struct();
        md.string_field(4, "schema");
        md.i32_field(5, std::int64_t(table.columns.size()));
        md.end_struct();
    }
    for (const auto& col : table.columns) {
        md.begin_struct();
        md.i32_field(1, physical_type(col.type));
        md.i32_field(3, col.optional ? 1 : 0);
        md.string_field(4, col.name);
        if (col.type == Type::byte_array) md.i32_field(6, 0);  // UTF8
        md.end_struct();
    }
    md.i64_field(3, table.num_rows);
    md.field(4, TType::list);
    md.list_header(1, TType::structure);
    {  // the single row group
        md.begin_struct();
        md.field(1, TType::list);
        md.list_header(table.columns.size(), TType::structure);
        std::int64_t total = 0;
        for (size_t i = 0; i < table.columns.size(); ++i) {
            const auto& col = table.columns[i];
            md.begin_struct();
            md.i64_field(2, chunks[i].offset);
            md.field(3, TType::structure);  // ColumnMetaData
            md.begin_struct();
            md.i32_field(1, physical_type(col.type));
            md.field(2, TType::list);
            md.list_header(1, TType::i32);
            md.varint(ThriftWriter::zigzag(0));  // PLAIN
            md.field(3, TType::list);
            md.list_header(1, TType::binary);
            md.varint(col.name.size());
            md.out += col.name;
            md.i32_field(4, 0);  // UNCOMPRESSED
            md.i64_field(5, chunks[i].num_values);
            md.i64_field(6, chunks[i].size);
            md.i64_field(7, chunks[i].size);
            md.i64_field(9, chunks[i].offset);
            md.end_struct();
            md.end_struct();
            total += chunks[i].size;
        }
        md.i64_field(2, total);
        md.i64_field(3, table.num_rows);
        md.end_struct();
    }
    md.string_field(6, "edaschema");
    md.end_struct();

    file += md.out;
    std::uint32_t footer_len = std::uint32_t(md.out.size());
    for (int i = 0; i < 4; ++i) file += char((footer_len >> (8 * i)) & 0xff);
    file += "PAR1";
    return file;
}

inline Table decode_table(std::span<const std::uint8_t> data) {
    using namespace detail;
    if (data.size() < 12 || std::memcmp(data.data(), "PAR1", 4) != 0 ||
        std::memcmp(data.data() + data.size() - 4, "PAR1", 4) != 0)
        throw ParseError("not a parquet file");
    std::uint32_t footer_len = 0;
    for (int i = 0; i < 4; ++i)
        footer_len |= std::uint32_t(data[data.size() - 8 + i]) << (8 * i);
    size_t footer_at = data.size() - 8 - footer_len;

    Table table;
    struct ChunkMeta {
        std::string name;
        Type type = Type::float64;
        std::int64_t offset = 0;
        std::int64_t num_values = 0;
    };
    std::vector<ChunkMeta> chunk_meta;
    std::map<std::string, bool> optional_by_name;

    ThriftReader rd(data, footer_at);
    int last = 0;
    while (true) {
        auto f = rd.read_field(last);
        if (f.type == TType::stop) break;
        last = f.id;
        if (f.id == 2 && f.type == TType::list) {  // schema
            std::uint8_t h = rd.byte();
            size_t n = h >> 4;
            if (n == 15) n = rd.varint();
            for (size_t i = 0; i < n; ++i) {
                // SchemaElement
                int sl = 0;
                int type = -1, repetition = 0;
                std::string name;
                while (true) {
                    auto sf = rd.read_field(sl);
                    if (sf.type == TType::stop) break;
                    sl = sf.id;
                    if (sf.id == 1)
                        type = int(rd.zigzag());
                    else if (sf.id == 3)
                        repetition = int(rd.zigzag());
                    else if (sf.id == 4)
                        name = rd.binary();
                    else
                        rd.skip(sf.type);
                }
                if (i == 0) continue;  // root
                if (type < 0) throw ParseError("schema element without a type");
                optional_by_name[name] = repetition == 1;
            }
        } else if (f.id == 3 && (f.type == TType::i64 || f.type == TType::i32)) {
            table.num_rows = rd.zigzag();
        } else if (f.id == 4 && f.type == TType::list) {  // row groups
            std::uint8_t h = rd.byte();
            size_t n_groups = h >> 4;
            if (n_groups == 15) n_groups = rd.varint();
            if (n_groups != 1) throw ParseError("expected a single row group");
            int gl = 0;
            while (true) {
                auto gf = rd.read_field(gl);
                if (gf.type == TType::stop) break;
                gl = gf.id;
                if (gf.id == 1 && gf.type == TType::list) {  // column chunks
                    std::uint8_t ch = rd.byte();
                    size_t n_cols = ch >> 4;
                    if (n_cols == 15) n_cols = rd.varint();
                    for (size_t i = 0; i < n_cols; ++i) {
                        ChunkMeta meta;
                        int cl = 0;
                        while (true) {
                            auto cf = rd.read_field(cl);
                            if (cf.type == TType::stop) break;
                            cl = cf.id;
                            if (cf.id == 3 && cf.type == TType::structure) {
                                int ml = 0;
                                while (true) {
                                    auto mf = rd.read_field(ml);
                                    if (mf.type == TType::stop) break;
                                    ml = mf.id;
                                    if (mf.id == 1)
                                        meta.type = from_physical(int(rd.zigzag()));
                                    else if (mf.id == 3 && mf.type == TType::list) {
                                        std::uint8_t ph = rd.byte();
                                        size_t np = ph >> 4;
                                        if (np == 15) np = rd.varint();
                                        for (size_t p = 0; p < np; ++p)
                                            meta.name = rd.binary();
                                    } else if (mf.id == 5)
                                        meta.num_values = rd.zigzag();
                                    else if (mf.id == 9)
                                        meta.offset = rd.zigzag();
                                    else
                                        rd.skip(mf.type);
                                }
                            } else {
                                rd.skip(cf.type);
                            }
                        }
                        chunk_meta.push_back(std::move(meta));
                    }
                } else {
                    rd.skip(gf.type);
                }
            }
        } else {
            rd.skip(f.type);
        }
    }

    for (const auto& meta : chunk_meta) {
        Column col;
        col.name = meta.name;
        col.type = meta.type;
        col.optional = optional_by_name.count(meta.name) && optional_by_name[meta.name];

        // page header
        ThriftReader ph(data, size_t(meta.offset));
        int pl = 0;
        std::int64_t payload_size = 0, num_values = 0;
        while (true) {
            auto pf = ph.read_field(pl);
            if (pf.type == TType::stop) break;
            pl = pf.id;
            if (pf.id == 2)
                payload_size = ph.zigzag();
            else if (pf.id == 5 && pf.type == TType::structure) {
                int dl = 0;
                while (true) {
                    auto df = ph.read_field(dl);
                    if (df.type == TType::stop) break;
                    dl = df.id;
                    if (df.id == 1)
                        num_values = ph.zigzag();
                    else
                        ph.skip(df.type);
                }
            } else
                ph.skip(pf.type);
        }
        size_t pos = ph.pos();
        size_t end = pos + size_t(payload_size);
        if (end > data.size()) throw ParseError("column chunk truncated");

        size_t defined = size_t(num_values);
        if (col.optional) {
            col.present = decode_def_levels(data, pos, size_t(num_values));
            defined = 0;
            for (auto p : col.present) defined += p;
        }
        switch (col.type) {
            case Type::boolean:
                for (size_t i = 0; i < defined; ++i)
                    col.bools.push_back((data[pos + i / 8] >> (i % 8)) & 1u);
                break;
            case Type::int64:
                for (size_t i = 0; i < defined; ++i) {
                    std::uint64_t v = 0;
                    for (int b = 0; b < 8; ++b)
                        v |= std::uint64_t(data[pos + i * 8 + b]) << (8 * b);
                    col.i64s.push_back(std::int64_t(v));
                }
                break;
            case Type::float64:
                for (size_t i = 0; i < defined; ++i) {
                    std::uint64_t v = 0;
                    for (int b = 0; b < 8; ++b)
                        v |= std::uint64_t(data[pos + i * 8 + b]) << (8 * b);
                    double d;
                    std::memcpy(&d, &v, 8);
                    col.f64s.push_back(d);
                }
                break;
            case Type::byte_array: {
                size_t at = pos;
                for (size_t i = 0; i < defined; ++i) {
                    std::uint32_t len = 0;
                    for (int b = 0; b < 4; ++b)
                        len |= std::uint32_t(data[at + b]) << (8 * b);
                    at += 4;
                    col.strings.emplace_back(reinterpret_cast<const char*>(data.data()) + at,
                                             len);
                    at += len;
                }
                break;
            }
        }
        table.columns.push_back(std::move(col));
    }
    return table;
}

}  // namespace eda::parquet
