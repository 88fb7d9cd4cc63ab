using UnityEngine;

// __CLASS__ runs a phase-based boss encounter.
__NOTES__
public class __CLASS__ : MonoBehaviour
{
    [SerializeField] private int maxHealth = 300;
    [SerializeField] private float phaseTwoThreshold = 0.5f;
    [SerializeField] private float slamCooldown = 3f;
    [SerializeField] private GameObject projectilePrefab;

    private int health;
    private int phase = 1;
    private float slamTimer;

    public int Phase => phase;

    private void Start()
    {
        health = maxHealth;
        slamTimer = slamCooldown;
    }

    private void Update()
    {
        slamTimer -= Time.deltaTime;
        if (slamTimer <= 0f)
        {
            PerformAttack();
            slamTimer = phase == 1 ? slamCooldown : slamCooldown * 0.5f;
        }
    }

    private void PerformAttack()
    {
        if (projectilePrefab == null)
        {
            return;
        }
        int count = phase == 1 ? 3 : 6;
        for (int i = 0; i < count; i++)
        {
            float angle = 360f / count * i;
            Instantiate(projectilePrefab, transform.position, Quaternion.Euler(0f, 0f, angle));
        }
    }

    public void TakeDamage(int amount)
    {
        health = Mathf.Max(0, health - amount);
        if (phase == 1 && health <= maxHealth * phaseTwoThreshold)
        {
            EnterPhaseTwo();
        }
        if (health == 0)
        {
            Destroy(gameObject);
        }
    }

    private void EnterPhaseTwo()
    {
        phase = 2;
    }
}
