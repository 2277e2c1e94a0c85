#include "hase/manifest.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <memory>

#include <openssl/evp.h>

#include "hase/errors.hpp"

namespace hase {

namespace {

class Sha1 {
public:
    Sha1() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha1(), nullptr) != 1)
            throw Error(ErrorKind::IoError, "SHA-1 context initialisation failed");
    }
    void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx_.get(), data, n); }
    std::string hex() {
        unsigned char md[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx_.get(), md, &len);
        static const char* digits = "0123456789abcdef";
        std::string s;
        for (unsigned i = 0; i < len; ++i) {
            s += digits[md[i] >> 4];
            s += digits[md[i] & 15];
        }
        return s;
    }

private:
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

std::string blob_header(std::uintmax_t size) { return "blob " + std::to_string(size) + std::string(1, '\0'); }

}  // namespace

std::string git_blob_sha1_bytes(const std::string& bytes) {
    Sha1 h;
    const std::string head = blob_header(bytes.size());
    h.update(head.data(), head.size());
    h.update(bytes.data(), bytes.size());
    return h.hex();
}

std::string git_blob_sha1(const std::string& path) {
    std::error_code ec;
    const auto size = std::filesystem::file_size(path, ec);
    std::ifstream is(path, std::ios::binary);
    if (ec || !is) throw Error(ErrorKind::IoError, "cannot read '" + path + "'");
    Sha1 h;
    const std::string head = blob_header(size);
    h.update(head.data(), head.size());
    std::vector<char> buf(1 << 20);
    while (is) {
        is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        h.update(buf.data(), static_cast<std::size_t>(is.gcount()));
    }
    return h.hex();
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void append_manifest(const std::string& path, const RunManifest& m) {
    using json = nlohmann::ordered_json;
    auto files = [](const std::vector<std::string>& paths) {
        json a = json::array();
        for (const auto& p : paths) {
            std::error_code ec;
            const auto size = std::filesystem::file_size(p, ec);
            a.push_back({{"path", p}, {"bytes", ec ? 0 : size}, {"git_sha1", git_blob_sha1(p)}});
        }
        return a;
    };
    json j{{"run_id", m.run_id},
           {"command", m.command},
           {"started_utc", m.started_utc},
           {"wall_time_s", m.wall_time_s},
           {"config_path", m.config_path},
           {"config", m.config},
           {"inputs", files(m.inputs)},
           {"outputs", files(m.outputs)}};
    std::ofstream os(path, std::ios::app);
    if (!os) throw Error(ErrorKind::IoError, "cannot open manifest '" + path + "'");
    os << j.dump() << '\n';
    if (!os) throw Error(ErrorKind::IoError, "write failed for '" + path + "'");
}

}  // namespace hase
