#include "omnidet/image.hpp"

#include <cctype>
#include <fstream>
#include <string>

#include "omnidet/config.hpp"

namespace omnidet {

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_header_token(std::istream& in, const std::string& source) {
    std::string token;
    int ch = in.get();
    while (ch != EOF) {
        if (ch == '#') {
            while (ch != EOF && ch != '\n') ch = in.get();
        } else if (std::isspace(ch)) {
            ch = in.get();
        } else {
            break;
        }
    }
    while (ch != EOF && !std::isspace(ch) && ch != '#') {
        token.push_back(static_cast<char>(ch));
        ch = in.get();
    }
    if (ch == '#') in.unget();
    if (token.empty()) throw ParseError(source + ": truncated image header");
    return token;
}

int header_int(std::istream& in, const std::string& source, const char* what) {
    const std::string token = next_header_token(in, source);
    const auto value = parse_int(token);
    if (!value || *value <= 0 || *value > 1 << 20) {
        throw ParseError(source + ": bad " + what + " '" + token + "'");
    }
    return static_cast<int>(*value);
}

}  // namespace

Image Image::constant(int width, int height, int channels, std::uint8_t value) {
    Image img;
    img.width = width;
    img.height = height;
    img.channels = channels;
    img.data.assign(static_cast<std::size_t>(width) * height * channels, value);
    return img;
}

Image read_image(std::istream& in, std::string source_name) {
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (!in || m0 != 'P' || (m1 != '5' && m1 != '6')) {
        throw ParseError(source_name + ": not a binary PGM/PPM file (expected P5 or P6)");
    }
    Image img;
    img.channels = (m1 == '6') ? 3 : 1;
    img.width = header_int(in, source_name, "width");
    img.height = header_int(in, source_name, "height");
    // the tokenizer already consumed the single whitespace after maxval
    const int maxval = header_int(in, source_name, "maxval");
    if (maxval != 255) throw ParseError(source_name + ": only maxval 255 is supported");
    const std::size_t expected = static_cast<std::size_t>(img.width) * img.height * img.channels;
    img.data.resize(expected);
    in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(expected));
    if (static_cast<std::size_t>(in.gcount()) != expected) {
        throw ParseError(source_name + ": truncated pixel data");
    }
    return img;
}

Image read_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open image: " + path.string());
    return read_image(in, path.string());
}

void write_image(const Image& image, std::ostream& out) {
    if (image.channels != 1 && image.channels != 3) {
        throw std::invalid_argument("write_image: channels must be 1 or 3");
    }
    if (image.data.size() != static_cast<std::size_t>(image.width) * image.height * image.channels) {
        throw std::invalid_argument("write_image: pixel buffer does not match dimensions");
    }
    out << (image.channels == 3 ? "P6" : "P5") << "\n"
        << image.width << " " << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.data.data()),
              static_cast<std::streamsize>(image.data.size()));
}

void write_image(const Image& image, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write image: " + path.string());
    write_image(image, out);
}

}  // namespace omnidet
