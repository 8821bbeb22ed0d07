"""
Shared test fixtures and hypothesis strategies.

The strategies generate policies that validate cleanly in strict mode, drawn
from small pools so that generated queries regularly hit declared names.
"""
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from language.models import (
    ActionList,
    ActionName,
    AgentSelector,
    DisallowRule,
    ElementBlock,
    FileType,
    Guideline,
    GuideRule,
    LanguageTag,
    PathBlock,
    PolicyFile,
    UserAgentBlock,
)

SUMMARY_GUIDELINE = 'Please keep the first line of each paragraph in the summarization.'

ARTICLE_POLICY = """\
# Paragraphs may not be used for training or summaries; images may not be edited.
User-agent: *
  Path: /articles/today.html html
    Element: p
      Disallow: Train Summarize
    Element: img
      Disallow: Manipulate
"""

GUIDE_POLICY = f"""\
User-agent: *
  Path: /articles/today.html html
    Element: p
      Guide: Summarize
        Lang: en-US
        Guideline: {SUMMARY_GUIDELINE}
"""

OVERLAP_POLICY = f"""\
User-agent: *
  Path: /articles/today.html html
    Element: p
      Disallow: Summarize
      Guide: Summarize
        Lang: en-US
        Guideline: {SUMMARY_GUIDELINE}
"""

# Parses cleanly but fails validation: V001 at 3:5.
BAD_SELECTOR_POLICY = 'User-agent: *\n  Path: / html\n    Element: p:hover\n      Disallow: *\n'

AGENT_POOL = ['GPTBot', 'ClaudeBot', 'Bing_AI', 'crawler01']
PATH_POOL = ['/', '/index.html', '/articles/today.html', '/docs/', '/docs//guide', '/feed.xml', '/a%20b']
ELEMENT_POOL = {
    FileType.HTML: ['p', 'img', 'div > p', '.lead', '#main', '*', 'a[href]'],
    FileType.JSON: ['title', 'meta.author', '*'],
    FileType.XML: ['title', 'meta.author', '*'],
}
LANGUAGE_POOL = ['en', 'en-US', 'fr-FR', 'de']

# Shared by the property tests.
property_settings = settings(deadline=None, suppress_health_check=[HealthCheck.too_slow])

# Names used as "fresh" query values that no generated policy declares.
FRESH_AGENT = 'FreshBot'
FRESH_PATH = '/never/declared.html'
FRESH_ELEMENT = 'section'

# Any single line the XML form can carry: no control characters except inner
# tabs, no U+FFFE/U+FFFF, and no leading blank (the separator after the colon).
_TEXT_CHARS = st.characters(codec='utf-8', exclude_categories=('Cs', 'Cc'), exclude_characters='\ufffe\uffff')
guideline_texts = st.builds(
    lambda first, rest: first + rest,
    st.characters(codec='utf-8', exclude_categories=('C', 'Z')),
    st.text(st.one_of(_TEXT_CHARS, st.sampled_from('\t <&>"\'')), max_size=30),
)


def action_lists():
    return st.one_of(
        st.just(ActionList.all()),
        st.lists(st.sampled_from(list(ActionName)), min_size=1, max_size=3, unique=True).map(
            lambda actions: ActionList(tuple(actions))
        ),
    )


def guidelines():
    return st.builds(Guideline, st.sampled_from(LANGUAGE_POOL).map(LanguageTag), guideline_texts)


def rules():
    return st.one_of(
        st.builds(DisallowRule, action_lists()),
        st.builds(GuideRule, action_lists(), st.lists(guidelines(), min_size=1, max_size=2).map(tuple)),
    )


@st.composite
def path_blocks(draw):
    file_type = draw(st.sampled_from(list(FileType)))
    names = draw(st.lists(st.sampled_from(ELEMENT_POOL[file_type]), min_size=1, max_size=4))
    elements = tuple(
        ElementBlock(name, tuple(draw(st.lists(rules(), min_size=1, max_size=3))))
        for name in names
    )
    return PathBlock(draw(st.sampled_from(PATH_POOL)), file_type, elements)


def agent_selectors():
    return st.one_of(
        st.just(AgentSelector.all()),
        st.lists(st.sampled_from(AGENT_POOL), min_size=1, max_size=3, unique=True).map(
            lambda names: AgentSelector(tuple(names))
        ),
    )


def user_agent_blocks():
    return st.builds(UserAgentBlock, agent_selectors(), st.lists(path_blocks(), min_size=1, max_size=4).map(tuple))


def policies():
    return st.lists(user_agent_blocks(), max_size=4).map(lambda blocks: PolicyFile(tuple(blocks)))
