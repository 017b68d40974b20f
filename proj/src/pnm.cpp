#include "pnm.hpp"

#include "pef/error.hpp"
#include "pef/text.hpp"

#include <cctype>
#include <string>

namespace pef::detail {
namespace {

class Cursor {
public:
    Cursor(const std::string& data, const std::string& origin) : data_(data), origin_(origin) {}

    void skip_space_and_comments()
    {
        while (pos_ < data_.size()) {
            if (data_[pos_] == '#') {
                while (pos_ < data_.size() && data_[pos_] != '\n') {
                    ++pos_;
                }
            } else if (std::isspace(static_cast<unsigned char>(data_[pos_]))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    long long number(const char* what)
    {
        skip_space_and_comments();
        std::size_t start = pos_;
        while (pos_ < data_.size() && std::isdigit(static_cast<unsigned char>(data_[pos_]))) {
            ++pos_;
        }
        if (start == pos_) {
            throw DataError(origin_ + ": malformed header (" + what + ")");
        }
        if (pos_ - start > 9) {
            throw DataError(origin_ + ": value too large (" + what + ")");
        }
        return std::stoll(data_.substr(start, pos_ - start));
    }

    std::size_t& pos() { return pos_; }
    const std::string& data() const { return data_; }

private:
    const std::string& data_;
    std::string origin_;
    std::size_t pos_ = 0;
};

} // namespace

PnmImage read_pnm(const std::filesystem::path& path, int channels)
{
    const std::string origin = path.string();
    const std::string data = text::read_file(path);
    if (data.size() < 2 || data[0] != 'P') {
        throw DataError(origin + ": missing netpbm magic");
    }
    const char kind = data[1];
    bool ascii = false;
    if (channels == 3 && kind == '6') {
        ascii = false;
    } else if (channels == 3 && kind == '3') {
        ascii = true;
    } else if (channels == 1 && kind == '5') {
        ascii = false;
    } else if (channels == 1 && kind == '2') {
        ascii = true;
    } else {
        throw DataError(origin + ": unsupported magic 'P" + std::string(1, kind) + "'");
    }

    Cursor cur(data, origin);
    cur.pos() = 2;
    const long long width = cur.number("width");
    const long long height = cur.number("height");
    const long long maxval = cur.number("max value");
    if (width <= 0 || height <= 0) {
        throw DataError(origin + ": image dimensions must be positive");
    }
    if (maxval != 255) {
        throw DataError(origin + ": unsupported max value " + std::to_string(maxval) + " (need 255)");
    }

    PnmImage img;
    img.width = static_cast<int>(width);
    img.height = static_cast<int>(height);
    img.channels = channels;
    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * channels;
    img.samples.resize(count);

    if (ascii) {
        for (std::size_t i = 0; i < count; ++i) {
            cur.skip_space_and_comments();
            if (cur.pos() >= data.size()) {
                throw DataError(origin + ": truncated pixel data");
            }
            long long v = cur.number("sample");
            if (v > 255) {
                throw DataError(origin + ": sample exceeds max value");
            }
            img.samples[i] = static_cast<std::uint8_t>(v);
        }
    } else {
        // Exactly one whitespace byte separates the header from the raster.
        std::size_t p = cur.pos();
        if (p >= data.size() || !std::isspace(static_cast<unsigned char>(data[p]))) {
            throw DataError(origin + ": malformed header terminator");
        }
        ++p;
        if (data.size() - p < count) {
            throw DataError(origin + ": truncated pixel data");
        }
        std::copy(data.begin() + static_cast<std::ptrdiff_t>(p),
                  data.begin() + static_cast<std::ptrdiff_t>(p + count), img.samples.begin());
    }
    return img;
}

void write_pnm(const std::filesystem::path& path, const PnmImage& image, bool ascii)
{
    const char kind = image.channels == 3 ? (ascii ? '3' : '6') : (ascii ? '2' : '5');
    std::string out = "P" + std::string(1, kind) + "\n" + std::to_string(image.width) + " " +
                      std::to_string(image.height) + "\n255\n";
    if (ascii) {
        const std::size_t per_row = static_cast<std::size_t>(image.width) * image.channels;
        for (std::size_t i = 0; i < image.samples.size(); ++i) {
            out += std::to_string(image.samples[i]);
            out += ((i + 1) % per_row == 0) ? '\n' : ' ';
        }
    } else {
        out.append(reinterpret_cast<const char*>(image.samples.data()), image.samples.size());
    }
    text::write_file(path, out);
}

} // namespace pef::detail
