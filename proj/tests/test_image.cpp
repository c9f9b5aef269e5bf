#include <sstream>

#include "doctest.h"
#include "omnidet/image.hpp"

using namespace omnidet;

TEST_CASE("PGM and PPM round-trip bit-exactly") {
    for (int channels : {1, 3}) {
        Image img;
        img.width = 5;
        img.height = 3;
        img.channels = channels;
        for (int i = 0; i < 15 * channels; ++i) img.data.push_back(static_cast<std::uint8_t>(17 * i));
        std::ostringstream out;
        write_image(img, out);
        CHECK(out.str().substr(0, 2) == (channels == 3 ? "P6" : "P5"));
        std::istringstream in(out.str());
        const Image back = read_image(in, "mem");
        CHECK(back.width == img.width);
        CHECK(back.height == img.height);
        CHECK(back.channels == img.channels);
        CHECK(back.data == img.data);
    }
}

TEST_CASE("image reader accepts header comments") {
    std::string payload = "P5\n# made by hand\n2 2\n255\nabcd";
    std::istringstream in(payload);
    const Image img = read_image(in, "mem");
    CHECK(img.width == 2);
    CHECK(img.at(0, 0) == 'a');
    CHECK(img.at(1, 1) == 'd');
}

TEST_CASE("image reader rejects malformed files") {
    std::istringstream bad_magic("P3\n2 2\n255\nabcd");
    CHECK_THROWS_AS(read_image(bad_magic, "mem"), ParseError);

    std::istringstream truncated("P5\n4 4\n255\nabc");
    CHECK_THROWS_WITH_AS(read_image(truncated, "mem"), doctest::Contains("truncated"), ParseError);

    std::istringstream bad_maxval("P5\n2 2\n65535\nabcd");
    CHECK_THROWS_AS(read_image(bad_maxval, "mem"), ParseError);
}

TEST_CASE("write_image validates the buffer") {
    Image img;
    img.width = 4;
    img.height = 4;
    img.channels = 1;
    img.data.resize(3);  // wrong
    std::ostringstream out;
    CHECK_THROWS_AS(write_image(img, out), std::invalid_argument);
}
