#include "volharness/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>

#include <openssl/evp.h>

#include "volharness/calendar.hpp"
#include "volharness/error.hpp"

namespace volharness {

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::InputFormat, "cannot open " + path.string());
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorKind::Numerical, "sha256 initialisation failed");
    }
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) {
        char b[3];
        std::snprintf(b, sizeof b, "%02x", digest[i]);
        hex += b;
    }
    return hex;
}

std::string manifest_timestamp() {
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
        char* end = nullptr;
        const long long v = std::strtoll(env, &end, 10);
        if (end && *end == '\0') return format_timestamp(v);
    }
    const auto now = std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
    return format_timestamp(now.time_since_epoch().count());
}

nlohmann::json to_json(const RunManifest& m) {
    nlohmann::json inputs = nlohmann::json::array();
    for (const auto& in : m.inputs) inputs.push_back({{"path", in.path}, {"sha256", in.sha256}});
    return {{"command", m.command},
            {"options", m.options},
            {"inputs", inputs},
            {"version", m.version},
            {"timestamp", m.timestamp}};
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Data, "cannot write " + path.string());
    out << to_json(m).dump(2) << '\n';
}

}  // namespace volharness
