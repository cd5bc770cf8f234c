#include "dimabsa/prompting.hpp"

#include "dimabsa/util.hpp"

#include <cstdio>

namespace dimabsa {

namespace {

// Initial quadruple instruction (zh).
const char* kPrompt1 = R"tmpl(执行一项情感四元组提取任务。给定一个句子，提取句子中所有的情感四元组(方面、类别、观点、强度)，用"\n"分隔不同的四元组。

每个四元组中的“方面”是句子中被评价对象的特定方面或特征，如果省略了该方面而没有明确提及，使用“NULL”来表示该术语。
”类别“是预定义的12种类别之一，根据常识判断。预定义类别：餐厅#概括、餐厅#价格、餐厅#杂项、食物#价格、食物#品质、食物#份量与款式、饮料#价格、饮料#品质、饮料#份量与款式、氛围#概括、服务#概括、地点#概括。
”观点“是对方面的情感词或短语。
”强度“指效价-唤醒的二维情绪强度，其中效价代表情绪体验的整体愉悦程度(高兴-不高兴)，唤醒代表情绪的强度水平(平静-兴奋)，每个指标的范围应为 1.0 到 9.0。在效价和唤醒维度上的值为 1 表示极度负面和低唤醒情感，相反，9 表示极度正面和高唤醒情感，5 表示中性和中等唤醒情感。精确到小数点后两位，效价-唤醒值以#分隔。

示例如下：
{examples}

请对于句子：
{sentence}

给出输出：)tmpl";

// Optimized quadruple instruction (zh); the default for quadruple runs.
const char* kPrompt2 = R"tmpl(执行一个情感四元组提取任务。给定一个句子，从中提取所有情感四元组，其中包括方面、类别、观点和强度，并用"\n"分隔不同的四元组。

每个四元组包括以下要素：
“方面”指的是句子中被评价对象的具体方面或特征。如果没有明确提及方面，则使用“NULL”表示。
“类别”是根据常识判断的预定义类别之一，共有12种。预定义类别包括：餐厅#概括、餐厅#价格、餐厅#杂项、食物#价格、食物#品质、食物#份量与款式、饮料#价格、饮料#品质、饮料#份量与款式、氛围#概括、服务#概括、地点#概括。
“观点”是对被评价对象特定方面的情感词或短语。
“强度”表示情感的效价和唤醒，分别代表情绪体验的整体愉悦程度（高兴-不高兴）和情绪的强度水平（平静-兴奋）。效价和唤醒的范围是1.0到9.0，其中1表示极度负面和低唤醒情感，9表示极度正面和高唤醒情感，5表示中性和中等唤醒情感。效价和唤醒值以#分隔，精确到小数点后两位。
输出格式应严格按照以下示例的格式：
(方面, 类别, 观点, 强度)
每个四元组在括号内，不要输出无关信息。
观点是最细粒度的情感词，需要为每一个提取出的观点生成相应的四元组。

示例如下：
{examples}

请对于句子：
{sentence}

给出输出：)tmpl";

const char* kPrompt1En = R"tmpl(Extract sentiment quads. Given a sentence, extract all sentiment quads (aspect, category, opinion, intensity) in the sentence, separated by "\n".

In each quad, the "aspect" is the specific aspect or feature of the object being evaluated in the sentence. If the aspect is omitted or not explicitly mentioned, use "NULL" to represent the term.
The "category" is one of the predefined 12 categories, determined based on common sense. The predefined categories are: Restaurant#General, Restaurant#Price, Restaurant#Miscellaneous, Food#Price, Food#Quality, Food#Portion and Style, Drink#Price, Drink#Quality, Drink#Portion and Style, Ambience#General, Service#General, Location#General.
The "opinion" is the sentiment word or phrase describing the aspect.
The "intensity" refers to the two-dimensional emotion intensity of Valence-Arousal, where valence represents the overall pleasantness of the emotional experience (happy-unhappy), and arousal represents the intensity level of the emotion (calm-excited). Each indicator ranges from 1.0 to 9.0. A value of 1 on the valence and arousal dimensions indicates extremely negative and low arousal emotions, respectively, while 9 indicates extremely positive and high arousal emotions, and 5 indicates neutral and medium arousal emotions. Values should be precise to two decimal places, with valence and arousal values separated by #.

Example:
{examples}

For the sentence:
{sentence}

Provide the output:)tmpl";

const char* kPrompt2En = R"tmpl(Execute a task of extracting sentiment quadruples. Given a sentence, extract all sentiment quadruples from it, including aspect, category, opinion, and intensity, and separate different quadruples with "\n".

Each quadruple includes the following elements:

"Aspect" refers to the specific aspect or feature of the evaluated object in the sentence. If the aspect is not explicitly mentioned, use "NULL" to represent it.
"Category" is one of the predefined categories judged based on common sense. There are 12 predefined categories: Restaurant#General, Restaurant#Prices, Restaurant#Miscellaneous, Food#Prices, Food#Quality, Food#Style and Options, Drinks#Prices, Drinks#Quality, Drinks#Style and Options, Ambience#General, Service#General, and Location#General.
"Opinion" is the emotional word or phrase regarding the specific aspect of the evaluated object.
"Intensity" represents the valence and arousal of the emotion, where valence indicates the overall pleasantness of the emotional experience (happy-unhappy) and arousal indicates the intensity level of the emotion (calm-excited). The range of valence and arousal is from 1.0 to 9.0, where 1 indicates extremely negative and low arousal emotion, 9 indicates extremely positive and high arousal emotion, and 5 indicates neutral and moderate arousal emotion. The valence and arousal values are separated by # and precise to two decimal places.
The output format should strictly follow the format of the following example:
(aspect, category, opinion, intensity).
Each quadruple should be enclosed in parentheses, and do not output any irrelevant information. Each opinion is the most granular emotional word, and a corresponding quadruple should be generated for each extracted opinion.

Example:
{examples}

Given the sentence:
{sentence}

Provide the output:)tmpl";

// Triplet-format variant of the optimized instruction; the default for
// triplet runs (category column dropped).
const char* kPrompt2Triplet = R"tmpl(执行一个情感三元组提取任务。给定一个句子，从中提取所有情感三元组，其中包括方面、观点和强度，并用"\n"分隔不同的三元组。

每个三元组包括以下要素：
“方面”指的是句子中被评价对象的具体方面或特征。如果没有明确提及方面，则使用“NULL”表示。
“观点”是对被评价对象特定方面的情感词或短语。
“强度”表示情感的效价和唤醒，分别代表情绪体验的整体愉悦程度（高兴-不高兴）和情绪的强度水平（平静-兴奋）。效价和唤醒的范围是1.0到9.0，其中1表示极度负面和低唤醒情感，9表示极度正面和高唤醒情感，5表示中性和中等唤醒情感。效价和唤醒值以#分隔，精确到小数点后两位。
输出格式应严格按照以下示例的格式：
(方面, 观点, 强度)
每个三元组在括号内，不要输出无关信息。
观点是最细粒度的情感词，需要为每一个提取出的观点生成相应的三元组。

示例如下：
{examples}

请对于句子：
{sentence}

给出输出：)tmpl";

const char* kPara01 = R"tmpl(你需要完成一个情感四元组抽取任务。请从给定的句子中找出全部情感四元组（方面, 类别, 观点, 强度），不同四元组之间用"\n"分隔。

要素说明：
“方面”：句子中被评价的具体对象或特征；若句中未明确提及，用“NULL”表示。
“类别”：从以下12个预定义类别中选择一个：餐厅#概括、餐厅#价格、餐厅#杂项、食物#价格、食物#品质、食物#份量与款式、饮料#价格、饮料#品质、饮料#份量与款式、氛围#概括、服务#概括、地点#概括。
“观点”：描述该方面的情感词或短语，取最细粒度的表达，每个观点对应一个四元组。
“强度”：效价#唤醒，两个值均在1.0到9.0之间并保留两位小数；1表示极度负面/低唤醒，5表示中性/中等唤醒，9表示极度正面/高唤醒。

输出格式为 (方面, 类别, 观点, 强度)，每行一个四元组，不要输出任何其他内容。

示例如下：
{examples}

请对于句子：
{sentence}

给出输出：)tmpl";

const char* kPara02 = R"tmpl(情感四元组提取。阅读一个餐厅评论句子，输出其中所有的(方面, 类别, 观点, 强度)四元组，四元组之间用"\n"分隔。

1. 方面：被评价对象的具体方面；句中未明确提及时写“NULL”。
2. 类别：必须是12个预定义类别之一：餐厅#概括、餐厅#价格、餐厅#杂项、食物#价格、食物#品质、食物#份量与款式、饮料#价格、饮料#品质、饮料#份量与款式、氛围#概括、服务#概括、地点#概括。
3. 观点：针对该方面的最细粒度情感词或短语，每个观点单独生成一个四元组。
4. 强度：格式为效价#唤醒，取值范围1.0至9.0，精确到小数点后两位；1为极度负面/低唤醒，5为中性/中等唤醒，9为极度正面/高唤醒。

每个四元组写在一对括号内，除四元组外不要输出任何内容。

示例如下：
{examples}

请对于句子：
{sentence}

给出输出：)tmpl";

const char* kPara03 = R"tmpl(你是一位餐饮评论情感分析专家。请对给定句子执行情感四元组提取，逐行列出(方面, 类别, 观点, 强度)，多个四元组之间用"\n"分隔。

判断规则：
- 方面是句子中被评价的对象或特征，未明确出现时记为“NULL”。
- 类别只能取以下12种之一：餐厅#概括、餐厅#价格、餐厅#杂项、食物#价格、食物#品质、食物#份量与款式、饮料#价格、饮料#品质、饮料#份量与款式、氛围#概括、服务#概括、地点#概括。
- 观点是表达情感的词或短语，应尽可能细粒度，每个观点生成一个四元组。
- 强度写作效价#唤醒：效价衡量愉悦程度（1极负面，5中性，9极正面），唤醒衡量激动程度（1很平静，5中等，9很兴奋），均保留两位小数。

只输出括号内的四元组，不要解释。

示例如下：
{examples}

请对于句子：
{sentence}

给出输出：)tmpl";

const char* kPara04 = R"tmpl(请从下面的评论句子中抽取全部情感四元组。每个四元组由方面、类别、观点和强度组成，写成 (方面, 类别, 观点, 强度) 的形式，并用"\n"分隔不同的四元组。

方面：被评价对象的具体方面或特征；若被省略或未明确提及，填“NULL”。
类别：根据常识从这12个预定义类别中判断：餐厅#概括、餐厅#价格、餐厅#杂项、食物#价格、食物#品质、食物#份量与款式、饮料#价格、饮料#品质、饮料#份量与款式、氛围#概括、服务#概括、地点#概括。
观点：对该方面的情感词或短语。
强度：效价和唤醒两个维度的分值，用#连接；每个分值在1.0到9.0之间，1表示极度负面和低唤醒，5表示中性和中等唤醒，9表示极度正面和高唤醒，精确到小数点后两位。

不要输出与四元组无关的信息。

示例如下：
{examples}

请对于句子：
{sentence}

给出输出：)tmpl";

const char* kPara05 = R"tmpl(任务：情感四元组提取。
输入：一个中文餐厅评论句子。
输出：句子中所有的情感四元组，每行一个，格式 (方面, 类别, 观点, 强度)，行之间用"\n"分隔，不输出其他内容。

字段定义：
方面 — 被评价的具体方面或特征；句中未明确提及时使用“NULL”。
类别 — 12个预定义类别之一（餐厅#概括、餐厅#价格、餐厅#杂项、食物#价格、食物#品质、食物#份量与款式、饮料#价格、饮料#品质、饮料#份量与款式、氛围#概括、服务#概括、地点#概括），依据常识选择。
观点 — 表达情感的最细粒度词语或短语，每个观点各生成一个四元组。
强度 — 效价#唤醒，均为1.0到9.0之间保留两位小数的数值；效价1极负面、5中性、9极正面，唤醒1很平静、5中等、9很兴奋。

示例如下：
{examples}

请对于句子：
{sentence}

给出输出：)tmpl";

const char* kPara06 = R"tmpl(下面给出一个餐厅评论句子，请完成情感四元组提取，找出句中每一个被评价的方面及其情感信息，按 (方面, 类别, 观点, 强度) 的格式逐条输出，条目之间用"\n"分隔。

注意事项：
若方面在句中被省略而没有明确提及，方面一栏写“NULL”。
类别必须从以下预定义集合中选择：餐厅#概括、餐厅#价格、餐厅#杂项、食物#价格、食物#品质、食物#份量与款式、饮料#价格、饮料#品质、饮料#份量与款式、氛围#概括、服务#概括、地点#概括。
观点取句子中最细粒度的情感词或短语，并为每个观点单独生成一条四元组。
强度由效价与唤醒两个分值组成，用#分隔，范围1.0到9.0，保留两位小数；1代表极度负面/低唤醒，5代表中性/中等，9代表极度正面/高唤醒。
除四元组本身外，不要输出任何说明文字。

示例如下：
{examples}

请对于句子：
{sentence}

给出输出：)tmpl";

const char* kPara07 = R"tmpl(请执行细粒度情感分析中的四元组提取：给定一个句子，识别其中所有 (方面, 类别, 观点, 强度) 组合，并用"\n"分隔不同的四元组输出。

“方面”为被评价对象的具体方面，未明确提及时用“NULL”占位。
“类别”限定为12个预定义标签：餐厅#概括、餐厅#价格、餐厅#杂项、食物#价格、食物#品质、食物#份量与款式、饮料#价格、饮料#品质、饮料#份量与款式、氛围#概括、服务#概括、地点#概括。
“观点”为针对该方面的情感词或短语；观点应最细粒度，每个观点对应一个四元组。
“强度”为效价#唤醒形式的二维分值：两个维度都取1.0到9.0并保留两位小数，1表示极度负面或低唤醒，5表示中性或中等唤醒，9表示极度正面或高唤醒。

输出时每个四元组放在括号内，勿附加其他内容。

示例如下：
{examples}

请对于句子：
{sentence}

给出输出：)tmpl";

const char* kPara08 = R"tmpl(从给定句子中提取情感四元组。一个四元组依次包含：方面、类别、观点、强度；按 (方面, 类别, 观点, 强度) 输出，四元组之间以"\n"分隔，除此之外不要有任何输出。

提取要求如下。方面是句子里被评价的对象方面，当句子省略了方面时记作“NULL”。类别依据常识在下列12项中选取：餐厅#概括、餐厅#价格、餐厅#杂项、食物#价格、食物#品质、食物#份量与款式、饮料#价格、饮料#品质、饮料#份量与款式、氛围#概括、服务#概括、地点#概括。观点是针对该方面的情感表达，取最细粒度的词或短语，并为每个观点生成对应的四元组。强度表示效价与唤醒：效价反映愉悦程度，唤醒反映激动程度，两者都在1.0至9.0之间（1极负面/很平静，5中性/中等，9极正面/很兴奋），以#连接并保留两位小数。

示例如下：
{examples}

请对于句子：
{sentence}

给出输出：)tmpl";

const char* kPara09 = R"tmpl(情感四元组提取任务说明：对输入句子中每一处情感表达，生成一个 (方面, 类别, 观点, 强度) 四元组；将所有四元组以"\n"分隔后输出，不要输出无关信息。

各字段含义：
* 方面：被评价对象的具体方面或特征，句中没有明确提及时填“NULL”。
* 类别：12个预定义类别之一——餐厅#概括、餐厅#价格、餐厅#杂项、食物#价格、食物#品质、食物#份量与款式、饮料#价格、饮料#品质、饮料#份量与款式、氛围#概括、服务#概括、地点#概括。
* 观点：对该方面的情感词或短语，保持最细粒度，每个观点单独成组。
* 强度：效价#唤醒，两个分值均在1.0到9.0范围内并精确到小数点后两位；1表示极度负面和低唤醒，5表示中性和中等唤醒，9表示极度正面和高唤醒。

示例如下：
{examples}

请对于句子：
{sentence}

给出输出：)tmpl";

std::vector<PromptTemplate> make_builtin_templates() {
    return {
        {"prompt1", kPrompt1, "zh"},
        {"prompt2", kPrompt2, "zh"},
        {"prompt1_en", kPrompt1En, "en"},
        {"prompt2_en", kPrompt2En, "en"},
        {"prompt2_triplet", kPrompt2Triplet, "zh"},
        {"para01", kPara01, "zh"},
        {"para02", kPara02, "zh"},
        {"para03", kPara03, "zh"},
        {"para04", kPara04, "zh"},
        {"para05", kPara05, "zh"},
        {"para06", kPara06, "zh"},
        {"para07", kPara07, "zh"},
        {"para08", kPara08, "zh"},
        {"para09", kPara09, "zh"},
    };
}

Tuple make_tuple(std::string aspect, std::string_view category, std::string opinion, double v, double a) {
    return Tuple{std::move(aspect), Category::from_text(category), std::move(opinion), Intensity{v, a}};
}

std::vector<IclExample> make_fixed_examples() {
    std::vector<IclExample> ex(4);
    ex[0].sentence = "独家的鲔鱼抹酱超好吃。";
    ex[0].tuples = {make_tuple("鲔鱼抹酱", "食物#品质", "超好吃", 7.50, 7.25)};
    ex[1].sentence = "服务员态度很差，等了半个小时才上菜。";
    ex[1].tuples = {make_tuple("服务员", "服务#概括", "态度很差", 2.75, 6.50)};
    ex[2].sentence = "整体来说性价比很高。";
    ex[2].tuples = {make_tuple("NULL", "餐厅#价格", "性价比很高", 7.00, 5.50)};
    ex[3].sentence = "店里环境不错，但是饮料有点贵。";
    ex[3].tuples = {make_tuple("环境", "氛围#概括", "不错", 6.50, 5.00),
                    make_tuple("饮料", "饮料#价格", "有点贵", 3.50, 5.25)};
    return ex;
}

} // namespace

const std::vector<PromptTemplate>& builtin_templates() {
    static const std::vector<PromptTemplate> templates = make_builtin_templates();
    return templates;
}

const PromptTemplate& find_builtin_template(std::string_view id) {
    for (const PromptTemplate& t : builtin_templates())
        if (t.id == id) return t;
    throw ValidationError("unknown builtin template: " + std::string(id));
}

const PromptTemplate& default_template(TupleMode mode) {
    return find_builtin_template(mode == TupleMode::triplet ? "prompt2_triplet" : "prompt2");
}

TemplatePool builtin_pool(std::uint64_t seed) {
    TemplatePool pool;
    pool.rng_seed = seed;
    pool.templates.push_back(find_builtin_template("prompt2"));
    for (int i = 1; i <= 9; ++i) {
        char id[8];
        std::snprintf(id, sizeof(id), "para%02d", i);
        pool.templates.push_back(find_builtin_template(id));
    }
    validate_pool(pool);
    return pool;
}

const std::vector<IclExample>& builtin_fixed_examples() {
    static const std::vector<IclExample> examples = make_fixed_examples();
    return examples;
}

} // namespace dimabsa
