#include "rfgate/trace_io.hpp"

#include "rfgate/util.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace rfgate {

void write_trace(std::ostream& os, const std::vector<TagRead>& reads) {
    os << "tag_id,t,rssi\n";
    for (const TagRead& r : reads)
        os << r.tag_id << ',' << fmt_fixed(r.t, 6) << ',' << fmt_fixed(r.rssi, 2) << '\n';
}

void write_trace_file(const std::string& path, const std::vector<TagRead>& reads) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open trace file for writing: " + path);
    write_trace(os, reads);
    if (!os.good()) throw std::runtime_error("trace write failed: " + path);
}

std::vector<TagRead> read_trace(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "tag_id,t,rssi")
        throw std::runtime_error("trace: missing or malformed header");
    std::vector<TagRead> reads;
    std::map<std::string, double> last_t;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw std::runtime_error("trace: bad record at line " + std::to_string(lineno));
        TagRead r;
        r.tag_id = line.substr(0, c1);
        try {
            r.t = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
            r.rssi = std::stod(line.substr(c2 + 1));
        } catch (const std::exception&) {
            throw std::runtime_error("trace: bad number at line " + std::to_string(lineno));
        }
        if (r.tag_id.empty() || r.t < 0.0 || !std::isfinite(r.t) || !std::isfinite(r.rssi))
            throw std::runtime_error("trace: invalid field at line " + std::to_string(lineno));
        auto it = last_t.find(r.tag_id);
        if (it != last_t.end() && r.t <= it->second)
            throw std::runtime_error("trace: non-increasing timestamps for " + r.tag_id +
                                     " at line " + std::to_string(lineno));
        last_t[r.tag_id] = r.t;
        reads.push_back(std::move(r));
    }
    return reads;
}

std::vector<TagRead> read_trace_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open trace file: " + path);
    return read_trace(is);
}

} // namespace rfgate
