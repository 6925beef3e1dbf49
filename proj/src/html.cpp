#include <algorithm>
#include <cctype>
#include <map>

#include "phishguard/features.hpp"

namespace phishguard::features {

namespace {

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

struct Tag {
    std::string name;        // lowercased, without '/'
    bool closing = false;
    std::map<std::string, std::string> attrs;  // lowercased keys
};

// Parses the contents between '<' and '>' (exclusive).
Tag parse_tag(const std::string& body) {
    Tag tag;
    std::size_t i = 0;
    if (i < body.size() && body[i] == '/') {
        tag.closing = true;
        ++i;
    }
    while (i < body.size() && !std::isspace(static_cast<unsigned char>(body[i])) &&
           body[i] != '/') {
        tag.name += static_cast<char>(std::tolower(static_cast<unsigned char>(body[i])));
        ++i;
    }
    while (i < body.size()) {
        while (i < body.size() && (std::isspace(static_cast<unsigned char>(body[i])) ||
                                   body[i] == '/')) {
            ++i;
        }
        if (i >= body.size()) break;
        std::string key;
        while (i < body.size() && body[i] != '=' && body[i] != '/' &&
               !std::isspace(static_cast<unsigned char>(body[i]))) {
            key += static_cast<char>(std::tolower(static_cast<unsigned char>(body[i])));
            ++i;
        }
        std::string value;
        while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i]))) ++i;
        if (i < body.size() && body[i] == '=') {
            ++i;
            while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i]))) ++i;
            if (i < body.size() && (body[i] == '"' || body[i] == '\'')) {
                const char quote = body[i++];
                while (i < body.size() && body[i] != quote) value += body[i++];
                if (i < body.size()) ++i;
            } else {
                while (i < body.size() && !std::isspace(static_cast<unsigned char>(body[i])) &&
                       body[i] != '>') {
                    value += body[i++];
                }
            }
        }
        if (!key.empty()) tag.attrs[key] = value;
    }
    return tag;
}

std::string attr(const Tag& tag, const std::string& key) {
    auto it = tag.attrs.find(key);
    return it == tag.attrs.end() ? std::string() : it->second;
}

bool has_attr(const Tag& tag, const std::string& key) {
    return tag.attrs.find(key) != tag.attrs.end();
}

}  // namespace

PageInventory parse_html(const std::string& html) {
    PageInventory inv;
    inv.lowered_html = to_lower(html);

    FormInfo* open_form = nullptr;
    bool in_title = false;
    std::size_t i = 0;
    while (i < html.size()) {
        if (html[i] != '<') {
            if (in_title) inv.title += html[i];
            ++i;
            continue;
        }
        // Comment?
        if (html.compare(i, 4, "<!--") == 0) {
            const std::size_t end = html.find("-->", i + 4);
            i = end == std::string::npos ? html.size() : end + 3;
            continue;
        }
        const std::size_t close = html.find('>', i + 1);
        if (close == std::string::npos) break;
        Tag tag = parse_tag(html.substr(i + 1, close - i - 1));
        i = close + 1;

        if (tag.name == "script" && !tag.closing) {
            // Skip to the close tag; inline body is covered by lowered_html.
            std::size_t end = inv.lowered_html.find("</script", i);
            if (has_attr(tag, "src")) {
                inv.resource_urls.push_back(attr(tag, "src"));
                inv.meta_script_link_urls.push_back(attr(tag, "src"));
            }
            i = end == std::string::npos ? html.size() : end;
            continue;
        }
        if (tag.closing) {
            if (tag.name == "form") open_form = nullptr;
            if (tag.name == "title") in_title = false;
            continue;
        }
        if (tag.name == "title") {
            inv.has_title = true;
            in_title = true;
        } else if (tag.name == "a") {
            inv.anchors.push_back(attr(tag, "href"));
        } else if (tag.name == "form") {
            inv.forms.push_back({attr(tag, "action"), to_lower(attr(tag, "method")), false, false});
            open_form = &inv.forms.back();
        } else if (tag.name == "input") {
            const std::string type = to_lower(attr(tag, "type"));
            if (open_form != nullptr) {
                if (type == "image") {
                    open_form->has_image = true;
                } else if (type.empty() || type == "text" || type == "password" ||
                           type == "email" || type == "tel" || type == "number" ||
                           type == "search" || type == "url") {
                    open_form->has_text_input = true;
                }
            }
        } else if (tag.name == "textarea") {
            if (open_form != nullptr) open_form->has_text_input = true;
        } else if (tag.name == "img") {
            inv.images.push_back(attr(tag, "src"));
            inv.resource_urls.push_back(attr(tag, "src"));
            if (open_form != nullptr) open_form->has_image = true;
        } else if (tag.name == "iframe" || tag.name == "frame") {
            ++inv.iframe_count;
            if (has_attr(tag, "src")) inv.resource_urls.push_back(attr(tag, "src"));
        } else if (tag.name == "embed" || tag.name == "source" || tag.name == "audio" ||
                   tag.name == "video") {
            if (has_attr(tag, "src")) inv.resource_urls.push_back(attr(tag, "src"));
        } else if (tag.name == "link") {
            const std::string rel = to_lower(attr(tag, "rel"));
            const std::string href = attr(tag, "href");
            if (!href.empty()) {
                inv.resource_urls.push_back(href);
                inv.meta_script_link_urls.push_back(href);
            }
            if (rel.find("icon") != std::string::npos && inv.favicon.empty()) {
                inv.favicon = href;
            }
        } else if (tag.name == "meta") {
            const std::string content = attr(tag, "content");
            // Only URL-shaped meta content counts as a resource.
            if (content.find("http://") != std::string::npos ||
                content.find("https://") != std::string::npos ||
                content.find("url=") != std::string::npos) {
                inv.meta_script_link_urls.push_back(content);
            }
        }
    }
    // Trim whitespace-only titles.
    const auto first = inv.title.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        inv.title.clear();
    } else {
        inv.title = inv.title.substr(first, inv.title.find_last_not_of(" \t\r\n") - first + 1);
    }
    return inv;
}

PageDocument make_document(const UrlParts& base, const std::string& html) {
    PageDocument doc;
    doc.base = base;
    doc.html = html;
    doc.inventory = parse_html(html);
    return doc;
}

}  // namespace phishguard::features
