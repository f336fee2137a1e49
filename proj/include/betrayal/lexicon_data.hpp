#pragma once

// Embedded copies of the files under data/lexicons/, so the library works
// without a data directory. A test asserts the two stay in sync.

namespace betrayal::lingcues::data {

inline constexpr const char* k_connectives = R"LEX(
although	comparison
but	comparison
by comparison	comparison
by contrast	comparison
conversely	comparison
even if	comparison
even though	comparison
however	comparison
in contrast	comparison
instead	comparison
nevertheless	comparison
nonetheless	comparison
on the contrary	comparison
on the other hand	comparison
rather	comparison
still	comparison
though	comparison
whereas	comparison
while	comparison
yet	comparison
accordingly	contingency
as	contingency
as a result	contingency
as long as	contingency
because	contingency
consequently	contingency
for	contingency
given that	contingency
hence	contingency
if	contingency
in that case	contingency
now that	contingency
provided that	contingency
since	contingency
so	contingency
so that	contingency
thereby	contingency
therefore	contingency
thus	contingency
unless	contingency
additionally	expansion
also	expansion
alternatively	expansion
and	expansion
as well	expansion
besides	expansion
for example	expansion
for instance	expansion
further	expansion
furthermore	expansion
in addition	expansion
in fact	expansion
in other words	expansion
in particular	expansion
indeed	expansion
likewise	expansion
moreover	expansion
nor	expansion
or	expansion
plus	expansion
similarly	expansion
that is	expansion
after	temporal
afterward	temporal
afterwards	temporal
as soon as	temporal
at last	temporal
at the same time	temporal
before	temporal
by then	temporal
earlier	temporal
eventually	temporal
finally	temporal
from now on	temporal
henceforth	temporal
hereafter	temporal
in the meantime	temporal
later	temporal
meanwhile	temporal
next	temporal
next year	temporal
once	temporal
previously	temporal
simultaneously	temporal
soon	temporal
subsequently	temporal
then	temporal
thereafter	temporal
until	temporal
until then	temporal
when	temporal
)LEX";

inline constexpr const char* k_planning = R"LEX(
afterwards
eventually
from now on
henceforth
hereafter
later
next
next year
soon
subsequently
thereafter
)LEX";

inline constexpr const char* k_claims = R"LEX(
i am convinced
i am sure
i assume
i believe
i bet
i expect
i feel
i reckon
i suppose
i suspect
i think
i'm convinced
i'm sure
in my opinion
it seems to me
my view is
)LEX";

inline constexpr const char* k_premises = R"LEX(
after all
as a result
because
consequently
due to
for this reason
given that
it follows that
owing to
seeing as
since
that is why
therefore
this shows that
which means
)LEX";

inline constexpr const char* k_subjectivity = R"LEX(
absurd
accusation
afraid
allegedly
apparently
blame
certainly
clearly
deceitful
disappointed
disappointing
dishonest
distrust
doubtful
dubious
fear
frankly
furious
honestly
mistrust
obviously
opinion
outrageous
paranoid
regrettably
resent
resentful
ridiculous
rumor
sadly
seemingly
skeptical
speculation
supposedly
surely
suspect
suspicion
suspicious
treacherous
treachery
undoubtedly
unfair
unfortunately
worried
)LEX";

inline constexpr const char* k_positive = R"LEX(
advantage
agree
agreeable
agreed
appreciate
appreciated
benefit
best
better
brilliant
confident
delighted
excellent
fair
faithful
fantastic
fine
friendly
gain
generous
glad
good
grateful
great
happy
helpful
honest
hopeful
joy
kind
loyal
nice
peace
peaceful
perfect
pleased
promising
prosper
prosperous
reliable
safe
secure
strong
stronger
success
successful
superb
thank
thanks
thrilled
trust
trusted
trustworthy
victorious
victory
win
winning
wins
wonderful
)LEX";

inline constexpr const char* k_negative = R"LEX(
afraid
angry
awful
bad
betray
betrayal
betrayed
betrays
cheat
cheated
cheating
danger
dangerous
deceit
deceive
defeat
defeated
disappointed
disappointing
dishonest
distrust
dreadful
enemies
enemy
fail
failed
fails
failure
fear
furious
hate
hated
horrible
hostile
hostility
liar
lie
lied
lies
lose
loses
losing
loss
lost
lying
miserable
sad
scared
terrible
threat
threaten
threatened
threats
traitor
unfair
unhappy
untrustworthy
unwise
upset
war
wars
weak
weaker
worry
worried
worse
worst
)LEX";

inline constexpr const char* k_negators = R"LEX(
ain't
aren't
barely
can't
cannot
couldn't
didn't
doesn't
don't
hardly
isn't
lack
lacking
neither
never
no
nobody
none
not
nothing
scarcely
shouldn't
wasn't
weren't
without
won't
wouldn't
)LEX";

inline constexpr const char* k_politeness = R"LEX(
gratitude	thank you|thanks|thank|grateful|appreciate|appreciated	0.87
greeting	^hi|^hello|^hey|^greetings|^dear	0.87
deference	^great|^good|^nice|^excellent|^interesting|you're right|you are right	0.78
please	please	0.49
hedges	i think|i believe|i suppose|i guess|perhaps|maybe|possibly|somewhat	0.14
factuality	in fact|actually|the point is|the reality is	-0.38
direct_question	^what|^why|^who|^when|^where|^how	-0.30
direct_start	^so|^then|^and|^but|^look	-0.43
second_person_start	^you|^your|^yours	-0.30
)LEX";

}  // namespace betrayal::lingcues::data
