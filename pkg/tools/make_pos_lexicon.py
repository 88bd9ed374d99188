#!/usr/bin/env python3
"""Regenerate the starter POS lexicon shipped in vidcurate/data.

Expands noun and verb stems with regular English morphology (plurals,
-s/-ing/-ed forms); words landing in both lists are tagged "both".
Run from the repo root: python tools/make_pos_lexicon.py
"""

from pathlib import Path

NOUN_STEMS = """
person man woman child boy girl baby friend family crowd team player coach
dog cat bird horse cow sheep goat pig rabbit mouse bear lion tiger elephant
monkey deer fox wolf fish shark whale dolphin seal turtle frog snake lizard
insect bee butterfly spider ant eagle owl duck goose chicken rooster penguin
car truck bus train plane airplane helicopter boat ship bicycle bike
motorcycle scooter tractor van taxi ambulance subway tram rocket drone
road street highway bridge tunnel sidewalk path trail crossing corner lane
city town village building house home apartment tower castle church temple
school hospital station airport harbor port market store shop mall office
factory farm barn garage shed cabin hotel restaurant cafe bar kitchen
bedroom bathroom hallway stair roof wall window door floor ceiling fence
gate yard garden park playground field meadow forest wood jungle desert
mountain hill valley cliff cave rock stone sand soil mud dust
river lake sea ocean beach shore coast wave tide stream waterfall pond pool
rain snow ice storm cloud sky sun moon star wind fog mist thunder lightning
tree flower plant grass leaf branch root seed fruit apple orange banana
grape lemon berry melon pear peach tomato potato carrot onion pepper corn
bread cake cookie pie soup salad meat beef pork chicken rice pasta noodle
cheese butter milk egg sugar salt coffee tea juice water wine beer bottle
cup glass plate bowl fork knife spoon pan pot oven stove fridge table chair
sofa couch bed desk shelf lamp mirror clock picture painting photo frame
camera phone computer laptop screen keyboard mouse speaker radio television
machine robot engine motor wheel tire gear tool hammer nail screw drill saw
ladder rope chain wire cable pipe tank pump battery switch button lever
ball bat racket net goal basket hoop board skate ski surfboard helmet glove
game match race competition tournament medal trophy score point
music song dance instrument guitar piano drum violin flute trumpet stage
microphone concert band singer dancer actor artist painter writer poet
book page paper letter word sentence story news magazine map sign label
money coin card ticket bag box basket bucket crate barrel package gift
clothes shirt dress pants coat jacket hat cap shoe boot sock scarf belt
hair face eye ear nose mouth lip tooth tongue neck shoulder arm elbow hand
finger thumb chest back waist leg knee foot toe skin bone muscle heart
morning evening night day week month year season spring summer autumn
winter hour minute second moment time light shadow color shape size edge
group pair line row circle square triangle center side top bottom front
fire smoke flame ash candle lantern torch spark explosion
job work task project plan idea question answer problem reason result
kid adult teacher student doctor nurse farmer worker driver pilot sailor
soldier police officer chef waiter clerk guard judge lawyer scientist
engineer mechanic carpenter plumber electrician barber tailor
crowd audience visitor tourist traveler guest neighbor stranger
bag backpack purse wallet umbrella key lock door handle knob
breakfast lunch dinner meal snack dish recipe flavor smell taste
video camera scene frame clip shot footage film movie
anchor angle ankle antenna apron arch arena arrow attic avenue axe
badge balcony balloon bamboo banana band banner barrel base basement
bead beak beam bean beard beast bell bench berry bib bin blade blanket
block blossom blouse bolt bonnet booth bow bowl brace bracelet brake
brick bride broom brush bubble bud buffalo bull bumper bun bundle bunker
bus bush cage calendar calf camel canal canoe canvas canyon cape
cargo carpet cart carton cartoon cascade castle cattle cauldron ceiling
cell cellar cement chain chalk chamber channel chapel charcoal chariot
chart chest chimney chin chip chisel chord cinema circus clam claw clay
cleat cliff cloak cloth clove clown club coal coast cobweb cocoon cod
coil collar colt column comb comet compass cone container continent
contraption copper coral cord cork cornfield costume cottage cotton
counter courtyard crab cradle crane crater crayon cream creek crest crew
crib cricket crocodile crop crossing crow crown crumb crust crystal cub
cube cucumber curb curtain cushion cycle cylinder dairy daisy dam dawn
deck den dial diamond dice dirt ditch dock dome donkey dough dragon
drain drawer dress drift drum dune dusk eagle earring easel echo eel
elbow elk ember emblem engine entrance envelope escalator estate exhaust
fabric falcon fan fang feather fern ferry fiddle fig fin firework
fireplace flag flake flamingo flap flashlight fleet flesh flint flock
flour foam foil fountain fowl frost froth funnel fur furnace galaxy
gallery gallon gap garland garlic gasoline gazelle gem geyser giant
ginger giraffe glacier glade glider globe goggles gong gown
grain grape grasshopper gravel gravy grill grove guitar gull gutter
hail hammock hamster handle harbor hare harness harp hatch hawk hay
haystack hedge heel helicopter herd heron hive hoe hog honey hood hoof
hook horizon horn hose hound hut hydrant iceberg icicle ink inn iron
island ivy jar jaw jeep jelly jewel jug juice jungle kangaroo kayak
kettle kite kitten knee knob knot koala ladle lagoon lamb lance
lantern lap lasso latch lawn ledge leash lens leopard lever lid
lighthouse lily limb lime limousine lion lobster log loft lumber lung
lynx machine mane mango manor mantle marble mare mask mast mat mattress
meadow mill mine mist mitten moat mole moose mop moss moth motor mound
mule mural mushroom muzzle nest net nook noodle nostril notch nut oak
oar oasis octopus orchard organ ostrich otter oven owl ox oyster paddle
pail palace palm panda panel panther parade parcel parrot pasture patch
patio paw peacock peak pearl pebble pedal pelican pen pencil penguin
perch pier pigeon pillar pillow pine pit pitcher plank planet platform
plaza plow plum pocket pod pole pony porch post pouch prairie puddle
pump pumpkin puppet puppy pyramid quarry quilt raccoon raft rail railway
ramp ranch raven reef reel reindeer ribbon ridge rifle rig rim ring
ripple robe robin rod rooster rope rose rug ruin rust saddle sail salmon
sandal sap sapling satchel saucer sawmill scaffold scale scarecrow
scooter scroll sculpture seagull seam seaweed shack shade shaft shall
shark shawl shear shed shell shepherd shield ship shovel shrub shutter
silk sill silo siren skillet skirt skull skyline slab sled sleeve slope
smokestack snail snout sofa soot spade sparrow spear sphere spike spine
spool spout sprout spruce squirrel stable stack stadium stall stallion
statue steam steeple stem stew stick stilt sting stool stork stove
strand strap straw stump summit swamp swan sword syrup tail tailgate
tarp tassel teapot telescope tent terrace thicket thorn thread throne
tiger tile timber tin toad toolbox torch tornado tortoise tractor
trailer tray trench tribe trolley trough trout trumpet trunk tub tube
tug tulip turban turf turkey turnip tusk twig twine udder unicorn urn
vane vase vault veil vine vineyard volcano wagon walnut walrus wand
warehouse wasp watermelon weed well whale wharf wheat wheelbarrow whisker
willow windmill wing wolfpack workshop worm wreath wren yacht yak yarn
zebra zoo
""".split()

VERB_STEMS = """
walk run jump climb crawl swim dive float fly glide hop skip dance spin
turn twist bend stretch lean sit stand lie kneel squat fall rise lift
carry hold grab grip drop throw catch toss roll slide push pull drag lift
open close lock unlock enter exit leave arrive approach depart cross pass
move stop start pause continue finish begin end wait stay remain
look watch see stare glance observe notice spot gaze peek
talk speak say tell shout whisper call yell sing hum laugh cry smile frown
eat drink chew bite swallow taste cook bake fry boil grill roast stir mix
pour cut chop slice peel spread serve feed
play kick hit strike bounce dribble shoot pass serve swing bat race compete
win lose score train practice exercise
drive ride steer park brake accelerate reverse tow crash
build make create construct assemble repair fix break destroy demolish
paint draw sketch write read type print erase
clean wash scrub wipe sweep mop dust polish rinse dry fold iron hang
plant grow water harvest dig rake mow trim prune pick gather collect
buy sell trade pay spend save borrow lend count weigh measure
teach learn study explain show demonstrate present describe discuss
help assist support guide lead follow chase escape flee hide seek find
search explore discover investigate examine inspect check test
work rest sleep wake dream relax breathe sigh yawn
wear dress undress button zip tie untie lace
throw catch juggle balance flip dodge duck leap vault
point wave nod shake clap snap tap knock pat touch rub scratch
listen hear smell sniff feel sense
carve weld drill hammer saw sand glue nail screw bolt
pack unpack load unload ship deliver send receive wrap unwrap
climb descend ascend slip trip stumble tumble
splash spray squirt drip leak flood soak
burn melt freeze thaw glow shine flash flicker sparkle
blow whistle ring buzz hum roar growl bark meow chirp
travel journey wander roam hike camp fish hunt
film record capture zoom pan focus edit stream upload
absorb accept accompany ache achieve acquire act adapt add address adjust
admire admit adopt adore advance advertise advise agree aim alert align
allow amaze amble anchor announce annoy answer appear applaud apply
argue arrange arrest arrive ask assemble attach attack attempt attend
attract avoid awaken bake bang bask bathe beckon beg behave belong
bicker billow blink bloom blossom blur boast bob boil bolt bomb bond
boost bore borrow bottle bounce bow box brace braid brainstorm brand
brew bridge brighten bring broadcast browse bruise brush bubble buckle
bud budge bump bundle burrow burst bury bustle butter
cackle calm caper capsize careen caress cart carve cascade cast cease
celebrate challenge change chant charge charm chase chat cheer cherish
chime chip chuckle churn circle clamber clamp clang clash clasp clatter
clench click cling clink clog close clutch coast coax collapse collide
comb combine command commute compare complain complete compose conceal
conclude conduct connect consider construct consume contain continue
convert convey cool cooperate coordinate copy correct cough cover covet
crack crackle cradle cram crash crave creak create creep crouch cruise
crumble crunch crush cuddle curl curve cushion
dab dangle dart dash daydream dazzle decorate dedicate defend delay
deliver demand demonstrate depart deposit descend design desire destroy
detach detect develop devour dim dine dip direct disappear discover
disguise dismount display dissolve distribute disturb divide dock
dodge dominate donate doodle doze drape dread drench drift drill drip
droop drown drum dunk dwell
earn ease echo edge eject elevate embrace emerge employ empty enclose
encounter encourage endure engage enjoy enlarge enter entertain equip
erase erupt establish estimate evade evaporate examine exchange excite
exclaim exhale exist expand expect explain explode express extend
fade fasten favor fear feast fetch fidget fill fire fit fizz flail
flap flare flatten flaunt flavor flee flick flinch fling flip flit
flock flop flourish flow fluff flutter foam fold forage force forge
forget forgive form fracture frame fret frolic frown fry fumble furnish
gallop gamble gape gargle gasp gather gaze gesture giggle glance glare
gleam glide glimmer glimpse glisten glitter gloat glow gnaw gobble
gossip grab graze greet grieve grin grind groan groom grope grumble
grunt guard guess gush
halt handle harvest haul heal heap heave herd hesitate hiccup hinge
hiss hoard hobble hoist honk hover howl huddle hug hurl hurry hush
identify ignite ignore illuminate imagine imitate improve inch indicate
inflate inform inhale inject injure insert insist install instruct
intend interrupt introduce invent invite
jab jam jangle jeer jerk jiggle jingle jog join jolt jostle judge
keep kindle kiss knead knit
label ladle lament land lash lather launch lecture level lick limp
linger list litter locate lodge loiter loll loom loop lounge lower
lug lull lumber lurch lurk
manage maneuver march mark marvel mash massage mature meander meet
mend mention merge mimic mingle mix moan mold monitor mount mourn
mumble munch murmur muse mutter
nab nag nail name nap narrate navigate negotiate nestle nibble nip
nudge nuzzle
obey oblige observe obtain occupy offer operate order organize
outline outrun overflow overlook overtake
pace paddle page pamper pant parade pardon part participate paste
pat patrol pause pave peck pedal peek peel peer perch perform persuade
photograph pierce pile pinch pitch pivot place plead pledge plod plop
plow pluck plunge pocket poke polish ponder pop pose position pounce
pounds pour pout practice praise prance preach prefer prepare present
preserve press pretend prevent prick proceed produce promise prop
propose protect protest prove provide prowl pry publish puff punch
purchase pursue
quarrel quench question quiver quote
rake rally ramble rattle reach react rebuild recall receive recite
reckon recognize recover reduce refer reflect refuse regain rejoice
release remember remind remove renew repair repeat replace reply
report request require rescue resist resolve respond retire retreat
return reveal revolve reward ripple roam roast rock rotate rouse rove
ruffle rummage rumble rush rustle
sag salute sample saunter savor scamper scan scatter scold scoop
scorch scour scout scowl scramble scrape scrawl scream screech scribble
scuttle seal season seize select settle sever sew shadow shatter shave
shear shelter shift shimmer shiver shove shovel shower shred shriek
shrink shrug shudder shuffle shun shut sift signal simmer sip sizzle
skid skim skitter slam slap slash slay sling slink slither slouch slump
slurp smash smear smirk smolder smooth snag snap snarl snatch sneak
sneeze snicker snip snooze snore snuggle soak soar sob soothe sort
sow spark sparkle spatter spell spill spit splash splinter split spoil
sprawl spread spring sprinkle sprint squash squeak squeal squeeze
squint squirm stagger stain stalk stamp staple stare startle starve
steal steer stitch stomp stoop store storm stow straddle strain stride
stroll strum strut stuff stumble stun surge surround survey swallow
swarm swat sway swerve swipe swirl swish swoop
tackle tangle taste tease tempt tend thank thaw thrash thread thrive
throb thrust thud thump tick tickle tilt tiptoe toast toddle topple
toss tote totter tour tow tower trace trade trail trample transfer
transform transport tread treat tremble trickle trim trot trudge tuck
tumble tune twinkle twirl twitch
unfold unite unravel unveil urge usher utter
vacuum vanish vault venture vibrate view visit volunteer
wade wail wait wake wander warm warn waste waver weave weep whimper
whine whip whirl whisk wiggle wilt wince wind wink wipe wish wobble
wonder worry wrap wreck wrestle wriggle wring wrinkle
yank yawn yearn yell yield zigzag zip
""".split()


IRREGULAR_PLURALS = {
    "person": "people", "man": "men", "woman": "women", "child": "children",
    "mouse": "mice", "foot": "feet", "tooth": "teeth", "goose": "geese",
    "sheep": "sheep", "deer": "deer", "fish": "fish", "leaf": "leaves",
    "wolf": "wolves", "knife": "knives", "shelf": "shelves", "loaf": "loaves",
}

IRREGULAR_PAST = {
    "run": "ran", "swim": "swam", "fly": "flew", "fall": "fell", "rise": "rose",
    "hold": "held", "throw": "threw", "catch": "caught", "eat": "ate",
    "drink": "drank", "speak": "spoke", "say": "said", "tell": "told",
    "sing": "sang", "win": "won", "lose": "lost", "drive": "drove",
    "ride": "rode", "build": "built", "make": "made", "break": "broke",
    "draw": "drew", "write": "wrote", "read": "read", "grow": "grew",
    "dig": "dug", "buy": "bought", "sell": "sold", "pay": "paid",
    "spend": "spent", "lend": "lent", "teach": "taught", "lead": "led",
    "find": "found", "seek": "sought", "sleep": "slept", "wake": "woke",
    "wear": "wore", "hear": "heard", "feel": "felt", "blow": "blew",
    "ring": "rang", "stand": "stood", "sit": "sat", "lie": "lay",
    "hide": "hid", "strike": "struck", "swing": "swung", "shoot": "shot",
    "hit": "hit", "cut": "cut", "put": "put", "leave": "left", "begin": "began",
    "see": "saw", "freeze": "froze", "melt": "melted", "send": "sent",
}

VOWELS = "aeiou"


def plural(noun: str) -> str:
    if noun in IRREGULAR_PLURALS:
        return IRREGULAR_PLURALS[noun]
    if noun.endswith(("s", "x", "z", "ch", "sh")):
        return noun + "es"
    if noun.endswith("y") and noun[-2] not in VOWELS:
        return noun[:-1] + "ies"
    return noun + "s"


def third_person(verb: str) -> str:
    if verb.endswith(("s", "x", "z", "ch", "sh", "o")):
        return verb + "es"
    if verb.endswith("y") and verb[-2] not in VOWELS:
        return verb[:-1] + "ies"
    return verb + "s"


def doubles_final(verb: str) -> bool:
    return (
        len(verb) >= 3
        and verb[-1] not in VOWELS + "wxy"
        and verb[-2] in VOWELS
        and verb[-3] not in VOWELS
    )


def gerund(verb: str) -> str:
    if verb.endswith("ie"):
        return verb[:-2] + "ying"
    if verb.endswith("e") and not verb.endswith("ee"):
        return verb[:-1] + "ing"
    if doubles_final(verb):
        return verb + verb[-1] + "ing"
    return verb + "ing"


def past(verb: str) -> str:
    if verb in IRREGULAR_PAST:
        return IRREGULAR_PAST[verb]
    if verb.endswith("e"):
        return verb + "d"
    if verb.endswith("y") and verb[-2] not in VOWELS:
        return verb[:-1] + "ied"
    if doubles_final(verb):
        return verb + verb[-1] + "ed"
    return verb + "ed"


def main() -> None:
    nouns = set()
    for stem in NOUN_STEMS:
        nouns.add(stem)
        nouns.add(plural(stem))
    verbs = set()
    for stem in VERB_STEMS:
        verbs.update({stem, third_person(stem), gerund(stem), past(stem)})
    entries = {}
    for w in sorted(nouns | verbs):
        if w in nouns and w in verbs:
            entries[w] = "both"
        elif w in nouns:
            entries[w] = "noun"
        else:
            entries[w] = "verb"
    out = Path(__file__).resolve().parents[1] / "src" / "vidcurate" / "data" / "pos_lexicon.tsv"
    header = (
        "# Starter POS lexicon (word<TAB>pos); regenerate with tools/make_pos_lexicon.py\n"
    )
    out.write_text(
        header + "".join(f"{w}\t{p}\n" for w, p in entries.items()), encoding="utf-8"
    )
    print(f"wrote {len(entries)} entries to {out}")


if __name__ == "__main__":
    main()
