//! Schemas, rows and questions for the three fixture databases.

pub struct Table {
    pub name: &'static str,
    /// `(column, sqlite type)`
    pub columns: &'static [(&'static str, &'static str)],
    pub rows: &'static str,
}

pub struct Database {
    pub db_id: &'static str,
    pub tables: &'static [Table],
    /// `(table, column, referenced table, referenced column)`
    pub foreign_keys: &'static [(&'static str, &'static str, &'static str, &'static str)],
}

pub const CAR_1: Database = Database {
    db_id: "car_1",
    tables: &[
        Table {
            name: "continents",
            columns: &[("ContId", "INTEGER"), ("Continent", "TEXT")],
            rows: "(1,'america'),(2,'europe'),(3,'asia'),(4,'africa'),(5,'australia')",
        },
        Table {
            name: "countries",
            columns: &[("CountryId", "INTEGER"), ("CountryName", "TEXT"), ("Continent", "INTEGER")],
            rows: "(1,'usa',1),(2,'germany',2),(3,'france',2),(4,'japan',3),(5,'italy',2),(6,'sweden',2),\
                   (7,'uk',2),(8,'korea',3),(9,'russia',2),(10,'nigeria',4),(11,'australia',5),\
                   (12,'new zealand',5),(13,'egypt',4),(14,'mexico',1),(15,'brazil',1)",
        },
        Table {
            name: "car_makers",
            columns: &[("Id", "INTEGER"), ("Maker", "TEXT"), ("FullName", "TEXT"), ("Country", "INTEGER")],
            rows: "(1,'amc','American Motor Company',1),(2,'volkswagen','Volkswagen',2),(3,'bmw','BMW',2),\
                   (4,'gm','General Motors',1),(5,'ford','Ford Motor Company',1),(6,'chrysler','Chrysler',1),\
                   (7,'citroen','Citroen',3),(8,'nissan','Nissan Motors',4),(9,'fiat','Fiat',5),\
                   (10,'honda','Honda',4),(11,'mazda','Mazda',4),(12,'toyota','Toyota',4),(13,'volvo','Volvo',6),\
                   (14,'saab','Saab',6),(15,'hyundai','Hyundai',8),(16,'kia','Kia Motors',8),\
                   (17,'triumph','Triumph',7)",
        },
        Table {
            name: "model_list",
            columns: &[("ModelId", "INTEGER"), ("Maker", "INTEGER"), ("Model", "TEXT")],
            rows: "(1,1,'amc'),(2,2,'audi'),(3,3,'bmw'),(4,4,'buick'),(5,4,'cadillac'),(6,5,'ford'),\
                   (7,6,'chrysler'),(8,7,'citroen'),(9,8,'datsun'),(10,9,'fiat'),(11,10,'honda'),(12,11,'mazda'),\
                   (13,12,'toyota'),(14,13,'volvo'),(15,14,'saab'),(16,15,'hyundai'),(17,2,'volkswagen'),\
                   (18,4,'chevrolet'),(19,6,'dodge'),(20,6,'plymouth')",
        },
        Table {
            name: "car_names",
            columns: &[("MakeId", "INTEGER"), ("Model", "TEXT"), ("Make", "TEXT")],
            rows: "(1,'chevrolet','chevrolet chevelle malibu'),(2,'buick','buick skylark 320'),\
                   (3,'plymouth','plymouth satellite'),(4,'amc','amc rebel sst'),(5,'ford','ford torino'),\
                   (6,'ford','ford galaxie 500'),(7,'chevrolet','chevrolet impala'),(8,'plymouth','plymouth fury iii'),\
                   (9,'toyota','toyota corona mark ii'),(10,'datsun','datsun pl510'),\
                   (11,'volkswagen','volkswagen 1131 deluxe sedan'),(12,'audi','audi 100 ls'),(13,'saab','saab 99e'),\
                   (14,'bmw','bmw 2002'),(15,'fiat','fiat 124b'),(16,'honda','honda civic'),\
                   (17,'mazda','mazda rx2 coupe'),(18,'volvo','volvo 145e (sw)'),(19,'citroen','citroen ds-21 pallas'),\
                   (20,'hyundai','hyundai pony'),(21,'dodge','dodge challenger se'),(22,'cadillac','cadillac eldorado')",
        },
        Table {
            name: "cars_data",
            columns: &[
                ("Id", "INTEGER"),
                ("MPG", "REAL"),
                ("Cylinders", "INTEGER"),
                ("Edispl", "REAL"),
                ("Horsepower", "INTEGER"),
                ("Weight", "INTEGER"),
                ("Accelerate", "REAL"),
                ("Year", "INTEGER"),
            ],
            rows: "(1,18,8,307,130,3504,12.0,1970),(2,15,8,350,165,3693,11.5,1970),(3,18,8,318,150,3436,11.0,1970),\
                   (4,16,8,304,150,3433,12.0,1970),(5,17,8,302,140,3449,10.5,1970),(6,15,8,429,198,4341,10.0,1970),\
                   (7,14,8,454,220,4354,9.0,1970),(8,14,8,440,215,4312,8.5,1970),(9,24,4,113,95,2372,15.0,1970),\
                   (10,27,4,97,88,2130,14.5,1971),(11,26,4,97,46,1835,20.5,1970),(12,25,4,110,87,2672,17.5,1970),\
                   (13,24,4,121,110,2375,17.5,1970),(14,26,4,121,113,2234,12.5,1970),(15,30,4,79,67,1950,19.0,1974),\
                   (16,33,4,91,53,1795,17.4,1976),(17,19,4,70,97,2330,13.5,1972),(18,22,4,121,112,2868,15.5,1973),\
                   (19,21,6,168,120,3820,16.7,1976),(20,32,4,89,71,1990,14.9,1978),(21,18.6,8,318,135,3830,15.2,1979),\
                   (22,23,8,350,125,3900,17.4,1979)",
        },
    ],
    foreign_keys: &[
        ("countries", "Continent", "continents", "ContId"),
        ("car_makers", "Country", "countries", "CountryId"),
        ("model_list", "Maker", "car_makers", "Id"),
        ("car_names", "Model", "model_list", "Model"),
        ("cars_data", "Id", "car_names", "MakeId"),
    ],
};

pub const CONCERT_SINGER: Database = Database {
    db_id: "concert_singer",
    tables: &[
        Table {
            name: "stadium",
            columns: &[
                ("Stadium_ID", "INTEGER"),
                ("Location", "TEXT"),
                ("Name", "TEXT"),
                ("Capacity", "INTEGER"),
                ("Highest", "INTEGER"),
                ("Lowest", "INTEGER"),
                ("Average", "INTEGER"),
            ],
            rows: "(1,'Raith Rovers','Stark''s Park',10104,4812,1294,2106),\
                   (2,'Ayr United','Somerset Park',11998,2363,1057,1477),\
                   (3,'East Fife','Bayview Stadium',2000,1980,533,864),\
                   (4,'Queen''s Park','Hampden Park',52500,1763,466,730),\
                   (5,'Stirling Albion','Forthbank Stadium',3808,1125,404,642),\
                   (6,'Arbroath','Gayfield Park',4125,921,411,638),\
                   (7,'Alloa Athletic','Recreation Park',3100,1057,331,637),\
                   (9,'Peterhead','Balmoor',4000,837,400,615),\
                   (10,'Brechin City','Glebe Park',3960,780,315,552)",
        },
        Table {
            name: "singer",
            columns: &[
                ("Singer_ID", "INTEGER"),
                ("Name", "TEXT"),
                ("Country", "TEXT"),
                ("Song_Name", "TEXT"),
                ("Song_release_year", "TEXT"),
                ("Age", "INTEGER"),
                ("Is_male", "TEXT"),
            ],
            rows: "(1,'Joe Sharp','Netherlands','You','1992',52,'F'),\
                   (2,'Timbaland','United States','Dangerous','2008',32,'T'),\
                   (3,'Justin Brown','France','Hey Oh','2013',29,'T'),\
                   (4,'Rose White','France','Sun','2003',41,'F'),\
                   (5,'John Nizinik','France','Gentleman','2014',43,'T'),\
                   (6,'Tribal King','France','Love','2016',25,'T')",
        },
        Table {
            name: "concert",
            columns: &[
                ("concert_ID", "INTEGER"),
                ("concert_Name", "TEXT"),
                ("Theme", "TEXT"),
                ("Stadium_ID", "INTEGER"),
                ("Year", "INTEGER"),
            ],
            rows: "(1,'Auditions','Free choice',1,2014),(2,'Super bootcamp','Free choice 2',2,2014),\
                   (3,'Home Visits','Bleeding Love',2,2015),(4,'Week 1','Wide Awake',10,2014),\
                   (5,'Week 1','Happy Tonight',9,2015),(6,'Week 2','Party All Night',7,2015)",
        },
        Table {
            name: "singer_in_concert",
            columns: &[("concert_ID", "INTEGER"), ("Singer_ID", "INTEGER")],
            rows: "(1,2),(1,3),(1,5),(2,3),(2,6),(3,5),(4,4),(5,6),(5,3),(6,2)",
        },
    ],
    foreign_keys: &[
        ("concert", "Stadium_ID", "stadium", "Stadium_ID"),
        ("singer_in_concert", "concert_ID", "concert", "concert_ID"),
        ("singer_in_concert", "Singer_ID", "singer", "Singer_ID"),
    ],
};

pub const PETS_1: Database = Database {
    db_id: "pets_1",
    tables: &[
        Table {
            name: "Student",
            columns: &[
                ("StuID", "INTEGER"),
                ("LName", "TEXT"),
                ("Fname", "TEXT"),
                ("Age", "INTEGER"),
                ("Sex", "TEXT"),
                ("Major", "INTEGER"),
                ("Advisor", "INTEGER"),
                ("city_code", "TEXT"),
            ],
            rows: "(1001,'Smith','Linda',18,'F',600,1121,'BAL'),(1002,'Kim','Tracy',19,'F',600,7712,'HKG'),\
                   (1003,'Jones','Shiela',21,'F',600,7792,'WAS'),(1004,'Kumar','Dinesh',20,'M',600,8423,'CHI'),\
                   (1005,'Gompers','Paul',26,'M',600,1121,'YYZ'),(1006,'Schultz','Andy',18,'M',600,1148,'BAL'),\
                   (1007,'Apap','Lisa',18,'F',600,8918,'PIT'),(1008,'Nelson','Jandy',20,'F',600,9172,'BAL'),\
                   (1009,'Tai','Eric',19,'M',600,2192,'YYZ'),(1010,'Lee','Derek',17,'M',600,2192,'HOU')",
        },
        Table {
            name: "Has_Pet",
            columns: &[("StuID", "INTEGER"), ("PetID", "INTEGER")],
            rows: "(1001,2001),(1002,2002),(1002,2003)",
        },
        Table {
            name: "Pets",
            columns: &[("PetID", "INTEGER"), ("PetType", "TEXT"), ("pet_age", "INTEGER"), ("weight", "REAL")],
            rows: "(2001,'cat',3,12.0),(2002,'dog',2,13.4),(2003,'dog',1,9.3)",
        },
    ],
    foreign_keys: &[("Has_Pet", "StuID", "Student", "StuID"), ("Has_Pet", "PetID", "Pets", "PetID")],
};

pub const DATABASES: [&Database; 3] = [&CONCERT_SINGER, &CAR_1, &PETS_1];

/// `(db_id, question, gold query)`, in dataset order.
pub const QUESTIONS: &[(&str, &str, &str)] = &[
    ("concert_singer", "How many singers do we have?", "SELECT count(*) FROM singer"),
    ("concert_singer", "Show name, country, age for all singers ordered by age from the oldest to the youngest.", "SELECT name ,  country ,  age FROM singer ORDER BY age DESC"),
    ("concert_singer", "What is the average, minimum, and maximum age of all singers from France?", "SELECT avg(age) ,  min(age) ,  max(age) FROM singer WHERE country  =  'France'"),
    ("concert_singer", "Show the name and the release year of the song by the youngest singer.", "SELECT song_name ,  song_release_year FROM singer ORDER BY age LIMIT 1"),
    ("concert_singer", "What are all distinct countries where singers above age 20 are from?", "SELECT DISTINCT country FROM singer WHERE age  >  20"),
    ("concert_singer", "Show all countries and the number of singers in each country.", "SELECT country ,  count(*) FROM singer GROUP BY country"),
    ("concert_singer", "How many singers are from each country?", "SELECT country ,  count(*) FROM singer GROUP BY country"),
    ("concert_singer", "List all song names by singers above the average age.", "SELECT song_name FROM singer WHERE age  >  (SELECT avg(age) FROM singer)"),
    ("concert_singer", "Show location and name for all stadiums with a capacity between 5000 and 10000.", "SELECT LOCATION ,  name FROM stadium WHERE capacity BETWEEN 5000 AND 10000"),
    ("concert_singer", "What is the maximum capacity and the average of all stadiums?", "SELECT max(capacity), average FROM stadium"),
    ("concert_singer", "What is the name and capacity for the stadium with highest average attendance?", "SELECT name ,  capacity FROM stadium ORDER BY average DESC LIMIT 1"),
    ("concert_singer", "How many concerts are there in year 2014 or 2015?", "SELECT count(*) FROM concert WHERE YEAR  =  2014 OR YEAR  =  2015"),
    ("concert_singer", "Show the stadium name and the number of concerts in each stadium.", "SELECT T2.name ,  count(*) FROM concert AS T1 JOIN stadium AS T2 ON T1.stadium_id  =  T2.stadium_id GROUP BY T1.stadium_id"),
    ("concert_singer", "Show the stadium name and capacity with most number of concerts in year 2014 or after.", "SELECT T2.name ,  T2.capacity FROM concert AS T1 JOIN stadium AS T2 ON T1.stadium_id  =  T2.stadium_id WHERE T1.year  >=  2014 GROUP BY T2.stadium_id ORDER BY count(*) DESC LIMIT 1"),
    ("concert_singer", "Show the stadium names without any concert.", "SELECT name FROM stadium WHERE stadium_id NOT IN (SELECT stadium_id FROM concert)"),
    ("concert_singer", "Show countries where a singer above age 40 and a singer below 30 are from.", "SELECT country FROM singer WHERE age  >  40 INTERSECT SELECT country FROM singer WHERE age  <  30"),
    ("concert_singer", "Show names for all stadiums except for stadiums having a concert in year 2014.", "SELECT name FROM stadium EXCEPT SELECT T2.name FROM concert AS T1 JOIN stadium AS T2 ON T1.stadium_id  =  T2.stadium_id WHERE T1.year  =  2014"),
    ("concert_singer", "Show the name and theme for all concerts and the number of singers in each concert.", "SELECT T2.concert_name ,  T2.theme ,  count(*) FROM singer_in_concert AS T1 JOIN concert AS T2 ON T1.concert_id  =  T2.concert_id GROUP BY T2.concert_id"),
    ("concert_singer", "List singer names and number of concerts for each singer.", "SELECT T2.name ,  count(*) FROM singer_in_concert AS T1 JOIN singer AS T2 ON T1.singer_id  =  T2.singer_id GROUP BY T2.singer_id"),
    ("concert_singer", "List all singer names in concerts in year 2014.", "SELECT T2.name FROM singer_in_concert AS T1 JOIN singer AS T2 ON T1.singer_id  =  T2.singer_id JOIN concert AS T3 ON T1.concert_id  =  T3.concert_id WHERE T3.year  =  2014"),
    ("concert_singer", "What is the name and nation of the singer who have a song having 'Hey' in its name?", "SELECT name ,  country FROM singer WHERE song_name LIKE '%Hey%'"),
    ("concert_singer", "Find the number of concerts happened in the stadium with the highest capacity.", "SELECT count(*) FROM concert WHERE stadium_id = (SELECT stadium_id FROM stadium ORDER BY capacity DESC LIMIT 1)"),
    ("car_1", "Which model of the car has the minimum horsepower?", "SELECT T1.Model FROM CAR_NAMES AS T1 JOIN CARS_DATA AS T2 ON T1.MakeId = T2.Id ORDER BY T2.Horsepower ASC LIMIT 1;"),
    ("car_1", "What are the names and ids of all countries with at least one car maker?", "SELECT T1.CountryName, T1.CountryId FROM COUNTRIES AS T1 JOIN CAR_MAKERS AS T2 ON T1.CountryId = T2.Country GROUP BY T1.CountryId HAVING COUNT(*) >= 1;"),
    ("car_1", "How many continents are there?", "SELECT count(*) FROM CONTINENTS;"),
    ("car_1", "How many countries does each continent have? List the continent id, continent name and the number of countries.", "SELECT T1.ContId ,  T1.Continent ,  count(*) FROM CONTINENTS AS T1 JOIN COUNTRIES AS T2 ON T1.ContId  =  T2.Continent GROUP BY T1.ContId;"),
    ("car_1", "How many countries are listed?", "SELECT count(*) FROM COUNTRIES;"),
    ("car_1", "How many models does each car maker produce? List maker full name, id and the number.", "SELECT T1.FullName ,  T1.Id ,  count(*) FROM CAR_MAKERS AS T1 JOIN MODEL_LIST AS T2 ON T1.Id  =  T2.Maker GROUP BY T1.Id;"),
    ("car_1", "What is the average horsepower of the cars before 1980?", "SELECT avg(horsepower) FROM CARS_DATA WHERE YEAR  <  1980;"),
    ("car_1", "What is the maximum accelerate for different number of cylinders?", "SELECT max(Accelerate) ,  Cylinders FROM CARS_DATA GROUP BY Cylinders;"),
    ("car_1", "How many cars have a larger accelerate than the car with the largest horsepower?", "SELECT COUNT(*) FROM CARS_DATA WHERE Accelerate  >  ( SELECT Accelerate FROM CARS_DATA ORDER BY Horsepower DESC LIMIT 1 );"),
    ("car_1", "How many car makers are there in each continents? List the continent name and the count.", "SELECT T1.Continent ,  count(*) FROM CONTINENTS AS T1 JOIN COUNTRIES AS T2 ON T1.ContId  =  T2.continent JOIN car_makers AS T3 ON T2.CountryId  =  T3.Country GROUP BY T1.Continent;"),
    ("car_1", "Which countries in europe have at least 3 car manufacturers?", "SELECT T1.CountryName FROM COUNTRIES AS T1 JOIN CONTINENTS AS T2 ON T1.Continent  =  T2.ContId JOIN CAR_MAKERS AS T3 ON T1.CountryId  =  T3.Country WHERE T2.Continent  =  'europe' GROUP BY T1.CountryName HAVING count(*)  >=  3;"),
    ("car_1", "What is the number of cars with more than 4 cylinders?", "SELECT count(*) FROM CARS_DATA WHERE Cylinders  >  4;"),
    ("car_1", "how many cars were produced in 1970?", "SELECT count(*) FROM CARS_DATA WHERE YEAR  =  1970;"),
    ("car_1", "What is the average weight of cars each year?", "SELECT avg(Weight) ,  YEAR FROM CARS_DATA GROUP BY YEAR;"),
    ("car_1", "Find the name of the makers that produced some cars in the year of 1970?", "SELECT DISTINCT T1.Maker FROM CAR_MAKERS AS T1 JOIN MODEL_LIST AS T2 ON T1.Id  =  T2.Maker JOIN CAR_NAMES AS T3 ON T2.model  =  T3.model JOIN CARS_DATA AS T4 ON T3.MakeId  =  T4.id WHERE T4.year  =  '1970';"),
    ("car_1", "What is the minimum weight of the car with 8 cylinders produced in 1974?", "SELECT min(weight) FROM cars_data WHERE cylinders  =  8 AND year  =  1974"),
    ("car_1", "What are all the makers and models?", "SELECT Maker ,  Model FROM MODEL_LIST;"),
    ("car_1", "What is the average edispl of the cars of model volvo?", "SELECT avg(T2.edispl) FROM CAR_NAMES AS T1 JOIN CARS_DATA AS T2 ON T1.MakeId  =  T2.Id WHERE T1.Model  =  'volvo';"),
    ("pets_1", "Find the number of pets whose weight is heavier than 10.", "SELECT count(*) FROM pets WHERE weight  >  10"),
    ("pets_1", "Find the weight of the youngest dog.", "SELECT weight FROM pets ORDER BY pet_age LIMIT 1"),
    ("pets_1", "Find the maximum weight for each type of pet. List the maximum weight and pet type.", "SELECT max(weight) ,  petType FROM pets GROUP BY petType"),
    ("pets_1", "Find number of pets owned by students who are older than 20.", "SELECT count(*) FROM student AS T1 JOIN has_pet AS T2 ON T1.stuid  =  T2.stuid WHERE T1.age  >  20"),
    ("pets_1", "Find the first name of students who have both cat and dog pets.", "SELECT T1.Fname FROM student AS T1 JOIN has_pet AS T2 ON T1.stuid  =  T2.stuid JOIN pets AS T3 ON T3.petid  =  T2.petid WHERE T3.pettype  =  'cat' INTERSECT SELECT T1.Fname FROM student AS T1 JOIN has_pet AS T2 ON T1.stuid  =  T2.stuid JOIN pets AS T3 ON T3.petid  =  T2.petid WHERE T3.pettype  =  'dog'"),
    ("pets_1", "Find the major and age of students who do not have a cat pet.", "SELECT major ,  age FROM student WHERE stuid NOT IN (SELECT T1.stuid FROM student AS T1 JOIN has_pet AS T2 ON T1.stuid  =  T2.stuid JOIN pets AS T3 ON T3.petid  =  T2.petid WHERE T3.pettype  =  'cat')"),
    ("pets_1", "Find the average and maximum age for each type of pet.", "SELECT avg(pet_age) ,  max(pet_age) ,  pettype FROM pets GROUP BY pettype"),
    ("pets_1", "Find the first name and age of students who have a pet.", "SELECT DISTINCT T1.fname ,  T1.age FROM student AS T1 WHERE stuid IN (SELECT stuid FROM has_pet)"),
    ("pets_1", "Find the number of distinct type of pets.", "SELECT count(DISTINCT pettype) FROM pets"),
    ("pets_1", "Find the id of the pet owned by student whose last name is 'Smith'.", "SELECT T2.petid FROM student AS T1 JOIN has_pet AS T2 ON T1.stuid  =  T2.stuid WHERE T1.Lname  =  'Smith'"),
];
