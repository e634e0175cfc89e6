#include "loopcheck/simulator.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "loopcheck/rng.hpp"
#include "loopcheck/sha256.hpp"
#include "loopcheck/text.hpp"

namespace loopcheck::sim {

using nlohmann::json;

const SceneObject* SceneGraph::find(const std::string& normalized_name) const {
    for (const auto& o : objects) {
        if (o.name == normalized_name) return &o;
    }
    return nullptr;
}

bool SceneGraph::contains(const std::string& name) const {
    return find(text::normalize_object_name(name)) != nullptr;
}

std::vector<std::string> SceneGraph::object_names() const {
    std::vector<std::string> names;
    names.reserve(objects.size());
    for (const auto& o : objects) names.push_back(o.name);
    return names;
}

json to_json(const SceneGraph& scene) {
    json objs = json::array();
    for (const auto& o : scene.objects) {
        objs.push_back(
            {{"name", o.name}, {"attributes", o.attributes}, {"salience", o.salience}});
    }
    return json{{"image_id", scene.image_id}, {"objects", std::move(objs)}};
}

SceneGraph scene_from_json(const json& j) {
    SceneGraph scene;
    scene.image_id = j.at("image_id").get<std::string>();
    std::set<std::string> names;
    for (const auto& jo : j.at("objects")) {
        SceneObject o;
        o.name = text::normalize_object_name(jo.at("name").get<std::string>());
        o.attributes = jo.at("attributes").get<std::vector<std::string>>();
        o.salience = jo.value("salience", 1.0);
        if (o.attributes.empty())
            throw std::invalid_argument("scene object " + o.name + " has no attributes");
        if (!names.insert(o.name).second)
            throw std::invalid_argument("duplicate object name in scene: " + o.name);
        scene.objects.push_back(std::move(o));
    }
    return scene;
}

std::vector<SceneGraph> load_scenes(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scene fixture: " + path.string());
    json j;
    in >> j;
    std::vector<SceneGraph> scenes;
    if (j.is_array()) {
        for (const auto& js : j) scenes.push_back(scene_from_json(js));
    } else {
        scenes.push_back(scene_from_json(j));
    }
    return scenes;
}

void save_scenes(const std::vector<SceneGraph>& scenes, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    json arr = json::array();
    for (const auto& s : scenes) arr.push_back(to_json(s));
    std::ofstream out(path);
    out << arr.dump(2) << '\n';
}

HallucinationProfile profile_from_json(const json& j) {
    HallucinationProfile p;
    p.p_assert_absent = j.value("p_assert_absent", p.p_assert_absent);
    p.p_borrow = j.value("p_borrow", p.p_borrow);
    if (j.contains("fabricated_pool"))
        p.fabricated_pool = j.at("fabricated_pool").get<std::vector<std::string>>();
    if (j.contains("distractor_vocab"))
        p.distractor_vocab = j.at("distractor_vocab").get<std::vector<std::string>>();
    p.rng_seed = j.value("rng_seed", p.rng_seed);
    return p;
}

ParsedQuestion parse_question(const std::string& question) {
    std::string q = text::collapse_spaces(text::to_lower(text::trim(question)));
    while (!q.empty() && (q.back() == '?' || q.back() == '.' || q.back() == ' ')) q.pop_back();

    if (auto object = text::parse_existence_question(question))
        return ExistenceQuestion{*object};

    auto strip_tail = [](std::string& s) {
        for (std::string_view tail : {" in the image", " in this image"}) {
            if (s.size() > tail.size() && s.ends_with(tail)) {
                s.resize(s.size() - tail.size());
                return true;
            }
        }
        return false;
    };

    const std::string describe_prefix = "could you please describe the ";
    if (q.starts_with(describe_prefix)) {
        std::string rest = q.substr(describe_prefix.size());
        if (strip_tail(rest))
            return DescribeQuestion{text::normalize_object_name(rest)};
    }

    const std::string coverage_prefix = "could you tell me all the objects that ";
    if (q.starts_with(coverage_prefix)) {
        std::string rest = q.substr(coverage_prefix.size());
        if (strip_tail(rest)) return CoverageQuestion{rest, true};
    }

    const std::string simple_prefix = "what ";
    if (q.starts_with(simple_prefix)) {
        std::string rest = q.substr(simple_prefix.size());
        if (strip_tail(rest)) return CoverageQuestion{rest, false};
    }

    if (q.find("describe this image") != std::string::npos ||
        q.find("describe the image") != std::string::npos)
        return CaptionQuestion{};

    throw UnrecognizedQuestion(question);
}

namespace {

// all randomness is a pure function of (scene id, profile seed, call seed,
// question)
Rng question_rng(const SceneGraph& scene, const HallucinationProfile& profile,
                 const chat::SamplingParams& params, const std::string& question) {
    uint64_t seed = profile.rng_seed;
    seed = seed * 0x9e3779b97f4a7c15ull + fnv1a64(scene.image_id);
    seed = seed * 0x9e3779b97f4a7c15ull + fnv1a64(question);
    if (params.seed) seed = seed * 0x9e3779b97f4a7c15ull + uint64_t(*params.seed);
    return Rng(seed);
}

std::vector<const SceneObject*> possessors(const SceneGraph& scene,
                                           const std::string& attribute) {
    std::string want = text::normalize_attribute_phrase(attribute);
    std::vector<const SceneObject*> owners;
    for (const auto& o : scene.objects) {
        for (const auto& a : o.attributes) {
            if (text::normalize_attribute_phrase(a) == want) {
                owners.push_back(&o);
                break;
            }
        }
    }
    std::stable_sort(owners.begin(), owners.end(),
                     [](const SceneObject* a, const SceneObject* b) {
                         if (a->salience != b->salience) return a->salience > b->salience;
                         return a->name < b->name;
                     });
    return owners;
}

std::string coverage_answer(const std::vector<const SceneObject*>& owners,
                            const std::string& attribute) {
    if (owners.empty()) return "There is nothing like that in the image.";
    std::string subject;
    for (size_t i = 0; i < owners.size(); ++i) {
        if (i > 0) subject += (i + 1 == owners.size()) ? " and " : ", ";
        subject += "the " + owners[i]->name;
    }
    std::string attr = text::normalize_attribute_phrase(attribute);
    if (owners.size() > 1) attr = text::pluralize_attribute_verb(attr);
    return text::capitalize(subject) + " " + attr + " in the image.";
}

std::string describe_present(const SceneObject& object) {
    std::string out;
    for (const auto& attr : object.attributes) {
        out += "The " + object.name + " " + attr + ". ";
    }
    if (!out.empty()) out.pop_back();
    return out;
}

std::string describe_absent(const SceneGraph& scene, const HallucinationProfile& profile,
                            const std::string& name, Rng& rng) {
    // attributes either borrowed from a real object or fabricated outright
    std::vector<std::string> attrs;
    int draws = 2;
    for (int i = 0; i < draws; ++i) {
        bool borrow = !scene.objects.empty() &&
                      (profile.fabricated_pool.empty() || rng.bernoulli(profile.p_borrow));
        std::string attr;
        if (borrow) {
            const SceneObject& donor = scene.objects[rng.uniform_below(scene.objects.size())];
            attr = donor.attributes[rng.uniform_below(donor.attributes.size())];
        } else if (!profile.fabricated_pool.empty()) {
            attr = profile.fabricated_pool[rng.uniform_below(profile.fabricated_pool.size())];
        } else {
            continue;
        }
        if (std::find(attrs.begin(), attrs.end(), attr) == attrs.end())
            attrs.push_back(attr);
    }
    if (attrs.empty()) attrs.push_back("is hard to make out");
    std::string out;
    for (const auto& attr : attrs) out += "The " + name + " " + attr + ". ";
    out.pop_back();
    return out;
}

std::string caption_answer(const SceneGraph& scene, const HallucinationProfile& profile,
                           Rng& rng) {
    std::vector<const SceneObject*> ordered;
    for (const auto& o : scene.objects) ordered.push_back(&o);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const SceneObject* a, const SceneObject* b) {
                         if (a->salience != b->salience) return a->salience > b->salience;
                         return a->name < b->name;
                     });
    std::string listing;
    for (size_t i = 0; i < ordered.size(); ++i) {
        if (i > 0) listing += (i + 1 == ordered.size()) ? " and " : ", ";
        listing += text::with_article(ordered[i]->name);
    }
    std::string out = "In this image, there is " + listing + ".";
    // an invented extra object, sometimes
    if (!profile.distractor_vocab.empty() && rng.bernoulli(profile.p_assert_absent)) {
        std::vector<std::string> absent;
        for (const auto& d : profile.distractor_vocab) {
            if (!scene.contains(d)) absent.push_back(text::normalize_object_name(d));
        }
        if (!absent.empty()) {
            out += " There is also " + text::with_article(absent[rng.uniform_below(absent.size())]) + ".";
        }
    }
    return out;
}

}  // namespace

std::string answer(const SceneGraph& scene, const HallucinationProfile& profile,
                   const std::string& question, const chat::SamplingParams& params) {
    ParsedQuestion parsed = parse_question(question);
    Rng rng = question_rng(scene, profile, params, question);

    if (const auto* q = std::get_if<ExistenceQuestion>(&parsed)) {
        if (scene.contains(q->object))
            return "Yes, there is " + text::with_article(q->object) + " in the image.";
        if (rng.bernoulli(profile.p_assert_absent))
            return "Yes, there is " + text::with_article(q->object) + " in the image.";
        return "No, there is no " + q->object + " in the image.";
    }
    if (const auto* q = std::get_if<DescribeQuestion>(&parsed)) {
        if (const SceneObject* obj = scene.find(q->object)) return describe_present(*obj);
        return describe_absent(scene, profile, q->object, rng);
    }
    if (const auto* q = std::get_if<CoverageQuestion>(&parsed)) {
        std::vector<const SceneObject*> owners = possessors(scene, q->attribute);
        if (!q->all_objects && owners.size() > 1) owners.resize(1);  // most obvious only
        return coverage_answer(owners, q->attribute);
    }
    return caption_answer(scene, profile, rng);
}

bool ground_truth(const SceneGraph& scene, const std::string& question) {
    ParsedQuestion parsed = parse_question(question);
    if (const auto* q = std::get_if<ExistenceQuestion>(&parsed))
        return scene.contains(q->object);
    throw UnrecognizedQuestion(question + " (not a binary existence question)");
}

SimulatorBackend::SimulatorBackend(SceneGraph scene, HallucinationProfile profile)
    : scene_(std::move(scene)), profile_(std::move(profile)) {
    // fabricated attributes must never coincide with real ones
    std::set<std::string> real;
    for (const auto& o : scene_.objects)
        for (const auto& a : o.attributes) real.insert(text::normalize_attribute_phrase(a));
    for (const auto& f : profile_.fabricated_pool) {
        if (real.count(text::normalize_attribute_phrase(f)))
            throw std::invalid_argument("fabricated attribute also exists in the scene: " + f);
    }
}

chat::ChatResult SimulatorBackend::chat(const std::vector<chat::ChatMessage>& messages,
                                        const chat::SamplingParams& params) {
    chat::validate_request(messages, params);
    chat::ChatResult result;
    for (int i = 0; i < params.n_samples; ++i) {
        chat::SamplingParams sample = params;
        if (params.n_samples > 1) {
            int64_t base = params.seed ? *params.seed : 0;
            sample.seed = base + i;
        }
        result.texts.push_back(answer(scene_, profile_, messages.back().text, sample));
    }
    return result;
}

Vocab load_vocab(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open vocab file: " + path.string());
    json j;
    in >> j;
    Vocab v;
    v.nouns = j.at("nouns").get<std::vector<std::string>>();
    v.attribute_pool = j.at("attribute_pool").get<std::vector<std::string>>();
    v.fabricated_pool = j.at("fabricated_pool").get<std::vector<std::string>>();
    return v;
}

CooccurrenceTable load_cooccurrence(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open co-occurrence file: " + path.string());
    json j;
    in >> j;
    CooccurrenceTable table;
    for (auto it = j.begin(); it != j.end(); ++it)
        table[it.key()] = it.value().get<std::vector<std::string>>();
    return table;
}

std::string existence_question(const std::string& noun) {
    return "Is there " + text::with_article(noun) + " in the image?";
}

namespace {

std::vector<std::string> pick_distinct(Rng& rng, const std::vector<std::string>& pool,
                                       size_t count, const std::set<std::string>& exclude) {
    std::vector<std::string> candidates;
    for (const auto& p : pool) {
        if (!exclude.count(p)) candidates.push_back(p);
    }
    if (candidates.size() < count)
        throw VocabTooSmall("need " + std::to_string(count) + " candidates, have " +
                            std::to_string(candidates.size()));
    rng.shuffle(candidates);
    candidates.resize(count);
    return candidates;
}

}  // namespace

FixtureSet generate_fixtures(int n_scenes, int objects_per_scene, int questions_per_image,
                             const Vocab& vocab, const CooccurrenceTable& cooccurrence,
                             uint64_t seed) {
    if (objects_per_scene < 2)
        throw std::invalid_argument("objects_per_scene must be >= 2");
    if (questions_per_image % 2 != 0)
        throw std::invalid_argument("questions_per_image must be even for a 50/50 balance");
    int positives = questions_per_image / 2;
    if (positives > objects_per_scene)
        throw VocabTooSmall("more positive questions than objects per scene");
    if (int(vocab.nouns.size()) < objects_per_scene + positives)
        throw VocabTooSmall("vocabulary smaller than objects per scene plus negatives");

    Rng rng(seed);
    FixtureSet out;

    for (int s = 0; s < n_scenes; ++s) {
        SceneGraph scene;
        char id[32];
        std::snprintf(id, sizeof id, "sim-%04d", s);
        scene.image_id = id;
        std::vector<std::string> names = pick_distinct(rng, vocab.nouns,
                                                       size_t(objects_per_scene), {});
        for (const auto& name : names) {
            SceneObject obj;
            obj.name = text::normalize_object_name(name);
            size_t n_attrs = 4 + rng.uniform_below(3);
            obj.attributes =
                pick_distinct(rng, vocab.attribute_pool, n_attrs, {});
            obj.salience = double(1 + rng.uniform_below(9));
            scene.objects.push_back(std::move(obj));
        }
        out.scenes.push_back(std::move(scene));
    }

    // popularity = frequency across the generated scene set
    std::map<std::string, int> frequency;
    for (const auto& scene : out.scenes)
        for (const auto& o : scene.objects) ++frequency[o.name];
    std::vector<std::string> by_popularity = vocab.nouns;
    std::stable_sort(by_popularity.begin(), by_popularity.end(),
                     [&](const std::string& a, const std::string& b) {
                         int fa = frequency.count(a) ? frequency.at(a) : 0;
                         int fb = frequency.count(b) ? frequency.at(b) : 0;
                         if (fa != fb) return fa > fb;
                         return a < b;
                     });

    for (const auto& scene : out.scenes) {
        std::set<std::string> present;
        for (const auto& o : scene.objects) present.insert(o.name);

        std::vector<std::string> names = scene.object_names();
        rng.shuffle(names);
        std::vector<std::string> positive_names(names.begin(), names.begin() + positives);

        // random: uniform over absent nouns
        std::vector<std::string> random_negs =
            pick_distinct(rng, vocab.nouns, size_t(positives), present);

        // popular: drawn from the most frequent absent nouns
        std::vector<std::string> popular_candidates;
        for (const auto& n : by_popularity) {
            if (!present.count(n)) popular_candidates.push_back(n);
            if (popular_candidates.size() >= size_t(positives) + 7) break;
        }
        std::vector<std::string> popular_negs =
            pick_distinct(rng, popular_candidates, size_t(positives), {});

        // adversarial: absent nouns that co-occur with a present object
        std::set<std::string> adversarial_pool;
        for (const auto& o : scene.objects) {
            auto it = cooccurrence.find(o.name);
            if (it == cooccurrence.end()) continue;
            for (const auto& partner : it->second) {
                std::string norm = text::normalize_object_name(partner);
                if (!present.count(norm)) adversarial_pool.insert(norm);
            }
        }
        std::vector<std::string> adversarial_candidates(adversarial_pool.begin(),
                                                        adversarial_pool.end());
        if (adversarial_candidates.size() < size_t(positives))
            throw VocabTooSmall("scene " + scene.image_id +
                                " has too few co-occurring absent nouns");
        std::vector<std::string> adversarial_negs =
            pick_distinct(rng, adversarial_candidates, size_t(positives), {});

        auto emit = [&](std::vector<eval::EvalRecord>& sink,
                        const std::vector<std::string>& negs, eval::Setting setting) {
            std::vector<eval::EvalRecord> batch;
            for (const auto& n : positive_names)
                batch.push_back({scene.image_id, existence_question(n), eval::Label::Yes,
                                 setting});
            for (const auto& n : negs)
                batch.push_back({scene.image_id, existence_question(n), eval::Label::No,
                                 setting});
            rng.shuffle(batch);
            for (auto& r : batch) sink.push_back(std::move(r));
        };
        emit(out.random_records, random_negs, eval::Setting::Random);
        emit(out.popular_records, popular_negs, eval::Setting::Popular);
        emit(out.adversarial_records, adversarial_negs, eval::Setting::Adversarial);
    }
    return out;
}

std::vector<eval::EvalRecord> generate_mme_records(const std::vector<SceneGraph>& scenes,
                                                   const Vocab& vocab, uint64_t seed) {
    Rng rng(seed);
    std::vector<eval::EvalRecord> records;
    for (const auto& scene : scenes) {
        std::set<std::string> present;
        for (const auto& o : scene.objects) present.insert(o.name);
        const std::string& pos = scene.objects[rng.uniform_below(scene.objects.size())].name;
        std::vector<std::string> neg = pick_distinct(rng, vocab.nouns, 1, present);
        records.push_back({scene.image_id, existence_question(pos), eval::Label::Yes,
                           eval::Setting::Existence});
        records.push_back({scene.image_id, existence_question(neg.front()), eval::Label::No,
                           eval::Setting::Existence});
    }
    return records;
}

}  // namespace loopcheck::sim
