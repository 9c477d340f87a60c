#!/usr/bin/env python3
"""Regenerates the frozen result-page fixtures and their expected item lists.

Each page is rendered from a list of blocks; the expected list is computed
here from the same blocks, independently of the Rust parser:

  * rank = 1-based position among result blocks (ads and widgets excluded)
  * url: lowercase scheme and host, drop fragment, keep everything else
  * title: NFC, whitespace runs collapsed, trimmed
  * blocks with a relative/unparseable url or empty title are rejected
  * a repeated (url, title) keeps its first rank only
  * only the first EXPECTED_COUNT blocks are considered

Run from this directory: python3 generate.py
"""

import html
import json
import unicodedata
from urllib.parse import quote

EXPECTED_COUNT = 10


def norm_url(raw):
    raw = raw.strip()
    if "://" not in raw:
        return None
    scheme, rest = raw.split("://", 1)
    if not scheme or not scheme[0].isalpha():
        return None
    rest = rest.split("#", 1)[0]
    end = len(rest)
    for sep in "/?":
        i = rest.find(sep)
        if i != -1:
            end = min(end, i)
    authority, tail = rest[:end], rest[end:]
    userinfo, host = "", authority
    if "@" in authority:
        at = authority.rfind("@")
        userinfo, host = authority[: at + 1], authority[at + 1 :]
    if not host:
        return None
    return f"{scheme.lower()}://{userinfo}{host.lower()}{tail}"


def norm_title(raw):
    return " ".join(unicodedata.normalize("NFC", raw).split())


def expected(engine, blocks):
    items, rejected, seen = [], [], set()
    for position, (url, title) in enumerate(blocks[:EXPECTED_COUNT], start=1):
        u, t = norm_url(url), norm_title(title)
        if u is None or not t:
            rejected.append(position)
            continue
        if (u, t) in seen:
            continue
        seen.add((u, t))
        items.append({"rank": position, "url": u, "title": t})
    full = len(items) >= EXPECTED_COUNT
    return {
        "engine": engine,
        "expected_count": EXPECTED_COUNT,
        "status": "complete" if full else ("missing" if not items else "incomplete"),
        "items": items,
        "rejected_positions": rejected,
    }


def esc(s):
    return html.escape(s, quote=True)


def page(head, body):
    return f"<!doctype html>\n<html><head><meta charset=\"utf-8\"><title>{head}</title></head>\n<body>\n{body}</body></html>\n"


# --- google: redirect links, heading div for titles, ad block ---------------
GOOGLE = [
    ("https://www.NYTimes.com/2020/11/04/us/politics/michigan-results.html", "Michigan Results: Biden Wins"),
    ("https://apnews.com/article/election-2020-joe-biden-pennsylvania-1f7f", "AP: Pennsylvania count continues"),
    ("https://www.cnn.com/2020/11/04/politics/election-live#live-feed", "Live updates: Election 2020"),
    ("https://www.reuters.com/article/us-usa-election-idUSKBN27K1", "Trump campaign sues to halt count"),
    ("https://www.washingtonpost.com/elections/2020/11/04/", "Where the race stands"),
    ("https://www.foxnews.com/politics/arizona-call", "Fox News stands by Arizona call"),
    ("https://www.npr.org/2020/11/04/931255/what-we-know", "What We Know   About The Vote Count"),
    ("https://www.bbc.co.uk/news/election-us-2020-54811410", "US election: Biden edges closer"),
    ("https://www.politico.com/news/2020/11/04/georgia-count-433911", "Georgia count tightens"),
    ("https://www.theguardian.com/us-news/live/2020/nov/04/?page=with:block-5fa2", "US election live"),
]


def google():
    out = ['<div id="search"><div class="uEierd"><span>Ad</span><a href="https://ads.example/x">Sponsored</a></div>\n']
    for url, title in GOOGLE:
        href = "/url?q=" + quote(url, safe="") + "&sa=U&ved=2ahUKE"
        out.append(
            f'<div class="SoaBEf"><a class="WlydOe" href="{esc(href)}">'
            f'<div class="CEMjEf"><span>Source</span></div>'
            f'<div role="heading" aria-level="3">{esc(title)}</div></a></div>\n'
        )
    out.append("</div>\n")
    return page("joe biden - Google Search", "".join(out)), GOOGLE


# --- bing: duplicate card, entity-encoded titles ----------------------------
BING = [
    ("https://www.usatoday.com/story/news/politics/elections/2020/11/03/", "Election Day: what to watch"),
    ("https://thehill.com/homenews/campaign/524325", "Trump & Biden make final pitch"),
    ("https://www.usatoday.com/story/news/politics/elections/2020/11/03/", "Election Day: what to watch"),
    ("https://www.nbcnews.com/politics/2020-election/live-blog/n1246", "Election results: \"too early to call\""),
    ("https://www.cbsnews.com/live-updates/election-2020/", "Battleground states still counting"),
    ("https://abcnews.go.com/Politics/live-updates/?id=73963", "Live: Vote counts continue"),
    ("https://www.wsj.com/articles/biden-trump-11604", "Biden, Trump trade leads"),
    ("https://www.axios.com/michigan-called-biden-2e1b.html", "Michigan called for Biden"),
    ("https://www.latimes.com/politics/story/2020-11-04/", "Nevada results delayed"),
    ("https://www.bloomberg.com/news/articles/2020-11-04/", "Markets rally as count drags on"),
]


def bing():
    out = ['<div class="main-container">\n<div class="ad-card"><a class="title" href="https://ads.example/b">Ad</a></div>\n']
    for url, title in BING:
        out.append(
            f'<div class="news-card newsitem cardcommon" data-author="x">'
            f'<div class="caption"><a class="title" target="_blank" href="{esc(url)}">{esc(title)}</a>'
            f'<div class="snippet">...</div></div></div>\n'
        )
    out.append("</div>\n")
    return page("donald trump - Bing News", "".join(out)), BING


# --- duckduckgo: uddg redirects, one relative link left unwrapped ------------
DDG = [
    ("https://www.theatlantic.com/politics/archive/2020/11/", "The Long Count"),
    ("https://www.vox.com/2020/11/4/21549033", "Why the count takes so long"),
    ("/relative/path/without/base-redirect", "Broken redirect"),
    ("https://www.motherjones.com/politics/2020/11/", "Pennsylvania mail ballots"),
    ("https://www.nationalreview.com/news/", "  Senate control   uncertain "),
    ("https://www.usnews.com/news/elections/articles/2020-11-04", "States to watch"),
    ("https://time.com/5907346/election-results/", "Election results explained"),
    ("https://www.buzzfeednews.com/article/", "Counting continues overnight"),
    ("https://www.newsweek.com/election-live-1544", "Newsweek live blog"),
    ("https://www.huffpost.com/entry/election-night_n_5fa", "Election night recap"),
]


def ddg():
    out = ['<div id="links" class="results">\n']
    for url, title in DDG:
        if url.startswith("/"):
            # a raw relative link with no redirect wrapper: resolves against
            # the base to a duckduckgo.com url, which is kept as-is
            href = url
        else:
            href = "//duckduckgo.com/l/?uddg=" + quote(url, safe="") + "&rut=0f3a"
        out.append(
            f'<div class="result results_links web-result"><div class="links_main">'
            f'<h2 class="result__title"><a rel="nofollow" class="result__a" href="{esc(href)}">{esc(title)}</a></h2>'
            f"</div></div>\n"
        )
    out.append("</div>\n")
    return page("us president at DuckDuckGo", "".join(out)), DDG


def ddg_expected_blocks():
    # relative hrefs resolve against https://duckduckgo.com/
    return [("https://duckduckgo.com" + u if u.startswith("/") else u, t) for u, t in DDG]


# --- yahoo: titles in attributes, decomposed accents, empty title ------------
YAHOO = [
    ("https://news.yahoo.com/biden-wins-wisconsin-181530.html", "Biden wins Wisconsin"),
    ("https://www.yahoo.com/news/pennsylvania-count-2020.html", "Pennsylvania count update"),
    ("https://news.yahoo.com/no-title-here.html", "   "),
    ("https://www.aol.com/news/election-results/", "Election results"),
    ("https://news.yahoo.com/cafe-owners-vote.html", "Café owners on the vote"),
    ("https://finance.yahoo.com/news/stocks-election-143.html", "Stocks climb on election day"),
    ("https://www.yahoo.com/news/georgia-recount.html", "Georgia recount looms"),
    ("https://news.yahoo.com/arizona-tally-02.html", "Arizona tally narrows"),
    ("https://sports.yahoo.com/athletes-vote.html", "Athletes turn out to vote"),
    ("HTTPS://NEWS.YAHOO.COM/Nevada-Update.html", "Nevada update"),
]


def yahoo():
    out = ['<div id="web"><ol class="searchCenterMiddle">\n']
    for url, title in YAHOO:
        out.append(
            f'<li><div class="dd NewsArticle"><ul class="compTitle"><li>'
            f'<h4 class="s-title fz-16 lh-20"><a href="{esc(url)}" title="{esc(title)}" class="thmb">'
            f"{esc(title.strip()[:12])}&hellip;</a></h4></li></ul></div></li>\n"
        )
    out.append("</ol></div>\n")
    return page("kamala harris - Yahoo News Search", "".join(out)), YAHOO


# --- baidu: real target in data-url, CJK titles ------------------------------
BAIDU = [
    ("https://www.bbc.com/zhongwen/simp/world-54807420", "美国大选：拜登赢得密歇根州"),
    ("https://cn.nytimes.com/usa/20201104/election-results/", "美国大选结果 实时更新"),
    ("https://www.zaobao.com.sg/realtime/world/story20201104", "特朗普宣布胜选 计票仍在继续"),
    ("https://news.sina.com.cn/w/2020-11-04/doc-iiznctkc9.shtml", "美国大选 关键摇摆州"),
    ("https://www.dw.com/zh/美国大选/a-55496000", "德国之声：美国大选"),
    ("https://www.rfi.fr/cn/国际/20201104", "法广：美国大选计票"),
    ("https://world.huanqiu.com/article/40f5W", "环球网：选情胶着"),
    ("https://www.thepaper.cn/newsDetail_forward_9862", "澎湃新闻：宾州计票"),
    ("https://news.ifeng.com/c/81Lh", "凤凰网：拜登领先"),
    ("https://www.voachinese.com/a/us-election-2020/5649.html", "美国之音：大选之夜"),
]


def baidu():
    out = ['<div id="content_left">\n<div class="result-op c-container xpath-log" tpl="ad"><span>广告</span></div>\n']
    for i, (url, title) in enumerate(BAIDU):
        redirect = f"http://www.baidu.com/link?url=opaque{i:02d}"
        out.append(
            f'<div class="result-op c-container new-pmd" tpl="news-normal">'
            f'<h3 class="news-title_1YtI1"><a href="{redirect}" data-url="{esc(url)}" target="_blank">{esc(title)}</a></h3>'
            f"</div>\n"
        )
    out.append("</div>\n")
    return page("百度资讯搜索_美国大选", "".join(out)), BAIDU


def baidu_expected(blocks):
    # the ad container matches div.result-op too; it has no link, so it is
    # rejected at position 1, every organic result shifts down by one and
    # the last one falls past the cutoff
    exp = expected("baidu", [("", "")] + blocks)
    return exp


def main():
    fixtures = {
        "google": google(),
        "bing": bing(),
        "duckduckgo": ddg(),
        "yahoo": yahoo(),
        "baidu": baidu(),
    }
    for engine, (doc, blocks) in fixtures.items():
        with open(f"{engine}.html", "w", encoding="utf-8") as f:
            f.write(doc)
        if engine == "duckduckgo":
            exp = expected(engine, ddg_expected_blocks())
        elif engine == "baidu":
            exp = baidu_expected(blocks)
        else:
            exp = expected(engine, blocks)
        with open(f"{engine}.expected.json", "w", encoding="utf-8") as f:
            json.dump(exp, f, ensure_ascii=False, indent=2)
            f.write("\n")


if __name__ == "__main__":
    main()
